use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use samlab_bench::{perm_prefix_query, sam, world};
use samlab_core::attacks::{inv_with_budget, SamPermInverter};
use samlab_core::prp::Prp;
use samlab_core::seed::master_seed;
use samlab_core::{run_live, sam_answer, HashFamily, LiveEnv, Program};

fn prp_eval(c: &mut Criterion) {
    let p = Prp::from_seed(20, &master_seed(1));
    c.bench_function("prp_eval_20", |b| {
        let mut x = 0u64;
        b.iter(|| {
            x = (x + 1) & 0xfffff;
            black_box(p.eval(x))
        })
    });
}

fn sam_answer_scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("sam_answer");
    for m in [8u32, 10, 12] {
        let mut w = world(m, 2);
        let h = HashFamily::new(master_seed(3));
        let q = perm_prefix_query(m, m / 2, 0x35);
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| sam_answer(&h, &mut w.adversary(), black_box(&q)).unwrap())
        });
    }
    g.finish();
}

fn blockwise_inversion(c: &mut Criterion) {
    let mut g = c.benchmark_group("invert_pi_12");
    g.sample_size(20);
    for d in [3u32, 6, 12] {
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            let mut seed = 0;
            b.iter(|| {
                seed += 1;
                let mut w = world(12, seed);
                let mut s = sam(seed);
                let y = w.perm(12).unwrap().eval(seed & 0xfff).unwrap();
                inv_with_budget(&Program::apply_perm(12), y, 1, d, u64::MAX, &mut LiveEnv::new(&mut w, &mut s)).ok().unwrap()
            })
        });
    }
    g.finish();
}

fn perm_inverter_live(c: &mut Criterion) {
    let adv = SamPermInverter { n: 10, d: 5, eps: 0.1 };
    c.bench_function("sam_perm_inverter_10_5", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            let mut w = world(10, seed);
            let mut s = sam(seed);
            run_live(&adv, seed & 0x3ff, &mut w, &mut s).unwrap()
        })
    });
}

criterion_group!(benches, prp_eval, sam_answer_scan, blockwise_inversion, perm_inverter_live);
criterion_main!(benches);
