use proptest::prelude::*;
use rand::Rng;

use samlab_core::attacks::{fixed_world, inv, InvParams};
use samlab_core::circuit::mask;
use samlab_core::pir::{self, ComOpening, ComParams, PirCom, Toeplitz};
use samlab_core::protocol::toy_commit;
use samlab_core::reconstruction::{self, Aux, BruteForce, SamScan};
use samlab_core::sam::{read_jsonl, write_jsonl};
use samlab_core::seed::{master_seed, rng};
use samlab_core::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn permutation_forward_backward_agree(seed in any::<u64>(), n in 1u32..=16, xs in prop::collection::vec(any::<u64>(), 1..40)) {
        let mut p = PermutationOracle::sample(DomainParam::new(n).unwrap(), master_seed(seed));
        let mut seen = std::collections::HashMap::new();
        for x in xs {
            let x = x & mask(n);
            let y = p.eval(x).unwrap();
            prop_assert_eq!(p.invert(y).unwrap(), x);
            prop_assert_eq!(*seen.entry(y).or_insert(x), x);
        }
    }

    #[test]
    fn same_seed_same_answers(seed in any::<u64>(), xs in prop::collection::vec(0u64..1024, 1..30)) {
        let mut a = World::new(master_seed(seed));
        let mut b = World::new(master_seed(seed));
        for &x in &xs {
            prop_assert_eq!(a.perm(10).unwrap().eval(x).unwrap(), b.perm(10).unwrap().eval(x).unwrap());
        }
    }

    #[test]
    fn extension_prefix_law(seed in any::<u64>(), m in 2u32..=10, l in 1u32..=4, tail in 1u32..=4, w in any::<u64>()) {
        let mut r = rng(&master_seed(seed));
        let a = Program::random(m, l, 3 * m, Some(m), &mut r);
        let t = Program::random(m, tail, 3 * m, None, &mut r);
        let b = Program::extend(&a, &t).unwrap();
        prop_assert!(is_extension(&a, &b));
        let mut world = World::new(master_seed(seed ^ 1));
        let w = w & mask(m);
        let (full, tr_b) = b.eval(w, &mut world.adversary()).unwrap();
        prop_assert_eq!(full & mask(l), a.eval_plain(w, &mut world.adversary()).unwrap());
        // purity
        let (again, tr_again) = b.eval(w, &mut world.adversary()).unwrap();
        prop_assert_eq!(full, again);
        prop_assert_eq!(tr_b, tr_again);
    }

    #[test]
    fn sam_answer_is_a_preimage_and_deterministic(seed in any::<u64>(), m in 2u32..=10, l in 1u32..=4, w in any::<u64>()) {
        let mut r = rng(&master_seed(seed));
        let c = Program::random(m, l.min(m), 3 * m, r.gen_bool(0.5).then_some(m), &mut r);
        let q = SamQuery::child(w & mask(m), c.clone(), c.ext_trivial(1).unwrap());
        let mut world = World::new(master_seed(seed ^ 2));
        let h = HashFamily::new(master_seed(seed ^ 3));
        let ans = sam_answer(&h, &mut world.adversary(), &q).unwrap();
        let o = &mut world.adversary();
        prop_assert_eq!(c.eval_plain(ans, o).unwrap(), c.eval_plain(w & mask(m), o).unwrap());
        prop_assert_eq!(sam_answer(&h, &mut world.adversary(), &q).unwrap(), ans);
    }

    #[test]
    fn stats_recomputed_from_jsonl(seed in any::<u64>(), steps in 1usize..5) {
        let mut r = rng(&master_seed(seed));
        let m = 8;
        let mut world = World::new(master_seed(seed ^ 4));
        let mut sam = SamOracle::new(HashFamily::new(master_seed(seed ^ 5)));
        let mut c = Program::random(m, 1, 2 * m, Some(m), &mut r);
        let mut w = sam.query(&mut world.adversary(), SamQuery::root(c.clone())).unwrap();
        for _ in 1..steps {
            let next = Program::extend(&c, &Program::random(m, 1, 2 * m, None, &mut r)).unwrap();
            w = sam.query(&mut world.adversary(), SamQuery::child(w, c, next.clone())).unwrap();
            c = next;
            sam.direct(&mut world.adversary(), OracleName::Perm(m as u8), w).unwrap();
        }
        let mut buf = Vec::new();
        write_jsonl(&sam.records(), &mut buf).unwrap();
        let back = read_jsonl(&buf[..]).unwrap();
        prop_assert_eq!(TraceStats::compute(&back), sam.stats());
        prop_assert_eq!(sam.stats().depth as usize, steps);
    }

    #[test]
    fn toy_commit_views_replay(seed in any::<u64>(), n in 6u32..=12, d in 1u32..=4) {
        let scheme = toy_commit(n, d).unwrap();
        let p = &scheme.protocol;
        let mut r = rng(&master_seed(seed));
        let (b, x, rc) = (r.gen::<u64>() & 1, r.gen::<u64>() & mask(n), r.gen::<u64>() & mask(n * d));
        let mut world = World::new(master_seed(seed));
        let e = p.execute(&mut world.adversary(), (b, x), (0, rc)).unwrap();
        prop_assert!(p.replay(Side::A, b, x, &e.transcript, &mut world.adversary()).unwrap());
        prop_assert!(p.replay(Side::B, 0, rc, &e.transcript, &mut world.adversary()).unwrap());
        let dec = Decommitment { value: b, coins: x };
        prop_assert_eq!(scheme.verify(&e.transcript, &dec, &mut world.adversary()).unwrap(), Some(b));
        // strategy programs reproduce the live sender messages
        let peer = p.messages_of(Side::B, &e.transcript);
        let own = p.messages_of(Side::A, &e.transcript);
        let prog = p.strategy_program(Side::A, &peer, own.len()).unwrap();
        let packed = prog.eval_plain(b | x << 1, &mut world.adversary()).unwrap();
        let mut off = 0;
        for (i, msg) in own.iter().enumerate() {
            let len = p.schedule[p.positions(Side::A)[i]].len;
            prop_assert_eq!((packed >> off) & mask(len), *msg);
            off += len;
        }
    }

    #[test]
    fn toeplitz_is_linear(x in any::<u64>(), x2 in any::<u64>(), t in any::<u64>(), out in 1u32..=8) {
        let e = Toeplitz::new(24, out).unwrap();
        let (x, x2, t) = (x & mask(24), x2 & mask(24), t & mask(e.seed_len()));
        prop_assert_eq!(e.eval(x ^ x2, t).unwrap(), e.eval(x, t).unwrap() ^ e.eval(x2, t).unwrap());
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn inv_outputs_are_preimages_within_depth(seed in any::<u64>(), k in 1u32..=4, d in 1u32..=4, y in 0u64..64) {
        let f = Program::truncate(10, 6);
        let p = InvParams::new(k, d, 0.1).unwrap();
        let mut world = World::new(master_seed(seed));
        let mut sam = SamOracle::new(HashFamily::new(master_seed(seed ^ 6)));
        let out = inv(&f, y, &p, &mut LiveEnv::new(&mut world, &mut sam)).ok().unwrap();
        if let Some(xs) = out.preimages {
            prop_assert_eq!(xs.len(), k as usize);
            prop_assert!(xs.iter().all(|&x| x & mask(6) == y));
        }
        let s = sam.stats();
        prop_assert!(s.normal_form);
        prop_assert!(s.depth <= d + 1);
    }

    #[test]
    fn reconstruction_round_trips(seed in any::<u64>(), n in 4u32..=5, which in 0usize..2) {
        let mut world = fixed_world(master_seed(seed), n).unwrap();
        let h = HashFamily::new(master_seed(seed ^ 7));
        let adv: Box<dyn Adversary> = if which == 0 { Box::new(BruteForce { n }) } else { Box::new(SamScan { n }) };
        let rep = reconstruction::encode(adv.as_ref(), &mut world, &h).unwrap();
        let aux = Aux::from_bytes(&rep.aux.to_bytes()).unwrap();
        prop_assert!(aux.size().payload_bits <= reconstruction::size_bound_bits(n, aux.a()));
        let mut ctx = World::new(master_seed(seed ^ 8));
        let dec = reconstruction::decode(&aux, adv.as_ref(), &h, &mut ctx).unwrap();
        prop_assert_eq!(dec.table, world.perm(n).unwrap().table());
    }

    #[test]
    fn com_verify_accepts_only_valid_reveals(seed in any::<u64>(), s in 0u64..2, flip in 0u32..20) {
        let com = PirCom::new(pir::clear_index(20).unwrap(), ComParams::new(20, 12, 6).unwrap()).unwrap();
        let run = com.commit(s, &master_seed(seed)).unwrap();
        prop_assert_eq!(run.sender_bits, com.sender_bits());
        let c = &run.commitment;
        prop_assert_eq!(com.verify(&run.receiver, c, &run.opening), Some(s));
        let wrong_s = ComOpening { s: s ^ 1, x: run.opening.x };
        prop_assert_eq!(com.verify(&run.receiver, c, &wrong_s), None);
        let other_x = ComOpening { s, x: run.opening.x ^ (1 << flip) };
        let accepted = com.verify(&run.receiver, c, &other_x);
        if flip as u64 == run.receiver.index {
            prop_assert_eq!(accepted, None);
        } else {
            // accepted exactly when the flipped column leaves ext unchanged
            let col = com.ext.column(c.t, flip);
            prop_assert_eq!(accepted.is_some(), col == 0);
        }
    }
}
