//! Seeded experiment runners. Each returns a serializable report; trials run
//! in parallel and are folded in trial order, so a report depends only on its
//! parameters and master seed.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{run_live, Adversary, Interrupt, LiveEnv};
use crate::attacks::{
    a_tilde, alpha_beta_trace, first_hit, fixed_world, hit_monitor, inv, inv_with_budget, opening, ChainAdversary,
    InvParams, SamPermInverter, STildeComm, STildeRound,
};
use crate::circuit::{mask, Program};
use crate::error::{Error, Result};
use crate::oracle::{OracleName, World};
use crate::pir::{self, ComParams, OmniscientClearIndex, PirCom, PirHiding, ReductionReport};
use crate::protocol::{binding_break_rate, hiding_distance, toy_commit, BindingReport, HidingEstimate, ReceiverSession, Side};
use crate::prp::HashFamily;
use crate::reconstruction::{self, Aux, BruteForce, QuarterTable, SamScan};
use crate::sam::{sam_answer, SamOracle, SamQuery, TraceRecord, TraceStats, ViolationKind};
use crate::seed::{self, derive, prf, Seed};
use crate::stats;

fn trial_seed(master: &Seed, tag: &str, t: u64) -> Seed {
    derive(master, tag, t)
}

fn live_err(i: Interrupt) -> Error {
    match i {
        Interrupt::Fail(e) => e,
        other => Error::Internal(format!("{other:?} in live run")),
    }
}

/// Normal-form and depth bookkeeping over many traces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub traces: u64,
    pub normal_form_failures: u64,
    pub max_depth: u32,
    pub total_sam_calls: u64,
}

impl TraceSummary {
    fn add(&mut self, s: &TraceStats) {
        self.traces += 1;
        self.normal_form_failures += !s.normal_form as u64;
        self.max_depth = self.max_depth.max(s.depth);
        self.total_sam_calls += s.sam_calls;
    }

    fn of<'a>(all: impl IntoIterator<Item = &'a TraceStats>) -> Self {
        let mut t = TraceSummary::default();
        for s in all {
            t.add(s);
        }
        t
    }
}

// ---------------------------------------------------------------- Sam law

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamLawReport {
    pub trials: u64,
    pub max_m: u32,
    /// Answers outside `C^{-1}(C(w))`.
    pub failures: u64,
    pub mean_preimage_size: f64,
}

/// Random gate programs (some with `pi` gates) at `4 <= m <= max_m`; every
/// answer is checked against the preimage set enumerated by brute force.
pub fn sam_preimage_law(trials: u64, max_m: u32, master: &Seed) -> Result<SamLawReport> {
    if !(4..=16).contains(&max_m) {
        return Err(Error::Budget(format!("preimage enumeration needs 4 <= m <= 16, got {max_m}")));
    }
    let rows: Vec<(bool, u64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ts = trial_seed(master, "law/trial", t);
            let mut r = seed::rng(&ts);
            let m = r.gen_range(4..=max_m);
            let l = r.gen_range(1..=m.min(6));
            let perm = r.gen_bool(0.5).then(|| r.gen_range(2..=m));
            let c = Program::random(m, l, 3 * m, perm, &mut r);
            let c_next = Program::extend(&c, &Program::constant(m, 1, 0))?;
            let w = r.gen::<u64>() & mask(m);
            let mut world = World::new(prf(&ts, "world", &[]));
            let h = HashFamily::new(prf(&ts, "h", &[]));
            let ans = sam_answer(&h, &mut world.adversary(), &SamQuery::child(w, c.clone(), c_next))?;
            let o = &mut world.adversary();
            let target = c.eval_plain(w, o)?;
            let mut preimages = Vec::new();
            for v in 0..1u64 << m {
                if c.eval_plain(v, o)? == target {
                    preimages.push(v);
                }
            }
            Ok((preimages.binary_search(&ans).is_ok(), preimages.len() as u64))
        })
        .collect::<Result<_>>()?;
    Ok(SamLawReport {
        trials,
        max_m,
        failures: rows.iter().filter(|r| !r.0).count() as u64,
        mean_preimage_size: rows.iter().map(|r| r.1 as f64).sum::<f64>() / trials.max(1) as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramUniformity {
    pub program: String,
    pub w: u64,
    pub preimage_size: u64,
    pub samples: u64,
    pub chi2: f64,
    pub p_value: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub m: u32,
    pub per_point: u64,
    pub programs: Vec<ProgramUniformity>,
    pub passed: usize,
}

/// The five fixed programs of the uniformity check at input length `m`.
pub fn uniformity_programs(m: u32) -> Vec<(String, Program)> {
    let mut r = seed::rng(&prf(&[0u8; 32], "uniformity/random", &[m as u8]));
    vec![
        ("truncate2".into(), Program::truncate(m, 2)),
        ("truncate4".into(), Program::truncate(m, 4)),
        ("parity".into(), Program::parity(m)),
        ("constant".into(), Program::constant(m, 3, 5)),
        ("random".into(), Program::random(m, 2, 4 * m, None, &mut r)),
    ]
}

/// For each program, `per_point * |C^{-1}(C(w))|` answers under fresh master
/// seeds; chi-square against uniform on the preimage set.
pub fn sam_uniformity(m: u32, per_point: u64, master: &Seed) -> Result<UniformityReport> {
    if m > 12 {
        return Err(Error::Budget(format!("uniformity check needs m <= 12, got {m}")));
    }
    let mut out = Vec::new();
    for (pi, (name, c)) in uniformity_programs(m).into_iter().enumerate() {
        let w = 0x5a & mask(m);
        let o = &mut crate::oracle::NoOracle;
        let target = c.eval_plain(w, o)?;
        let mut pre = Vec::new();
        for v in 0..1u64 << m {
            if c.eval_plain(v, o)? == target {
                pre.push(v);
            }
        }
        let c_next = c.ext_trivial(1)?;
        let samples = per_point * pre.len() as u64;
        let answers: Vec<u64> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let h = HashFamily::new(derive(&derive(master, "uniformity/program", pi as u64), "sample", s));
                sam_answer(&h, &mut crate::oracle::NoOracle, &SamQuery::child(w, c.clone(), c_next.clone()))
            })
            .collect::<Result<_>>()?;
        let mut counts = vec![0u64; pre.len()];
        for a in answers {
            let i = pre.binary_search(&a).map_err(|_| Error::Internal(format!("answer {a} outside the preimage set")))?;
            counts[i] += 1;
        }
        let (chi2, p) = if pre.len() >= 2 { stats::chi_square_uniform(&counts) } else { (0.0, 1.0) };
        out.push(ProgramUniformity {
            program: name,
            w,
            preimage_size: pre.len() as u64,
            samples,
            chi2,
            p_value: p,
            pass: p > 0.01,
        });
    }
    let passed = out.iter().filter(|p| p.pass).count();
    Ok(UniformityReport { m, per_point, programs: out, passed })
}

// ---------------------------------------------------------------- A-tilde

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ATildeReport {
    pub n: u32,
    pub d: u32,
    pub k: u32,
    pub trials: u64,
    /// Plug-in distance between honest and attacked transcripts, projected
    /// onto the linear-relation class of the receiver vectors (with the
    /// public mask vector) and the sender bits.
    pub tv: f64,
    pub cells: usize,
    pub samples_checked: u64,
    pub consistency_failures: u64,
    /// Trials whose Sam-call count differs from `d + k`.
    pub sam_count_mismatches: u64,
    /// Trials with query depth above `d + 1`.
    pub depth_violations: u64,
    pub traces: TraceSummary,
}

/// Bitmask over nonempty subsets `S` of `{a0, a_1..a_d}`: bit `S` set when
/// the vectors in `S` sum to zero.
fn relation_class(vectors: &[u64]) -> u64 {
    let mut out = 0u64;
    for s in 1u64..1 << vectors.len() {
        let x = vectors.iter().enumerate().filter(|(i, _)| s >> i & 1 == 1).fold(0, |a, (_, v)| a ^ v);
        if x == 0 {
            out |= 1 << s;
        }
    }
    out
}

fn toy_projection(n: u32, d: u32, transcript: &[u64]) -> (u64, u64) {
    let mut vectors = vec![crate::protocol::toy_mask_vector(n, d)];
    let mut bits = 0u64;
    let mut off = 0;
    for (i, m) in transcript.iter().enumerate() {
        if i % 2 == 0 {
            vectors.push(*m);
        } else {
            bits |= m << off;
            off += if i + 1 == transcript.len() { 2 } else { 1 };
        }
    }
    (relation_class(&vectors), bits)
}

/// Honest projection, attacked projection, samples, inconsistent samples, trace.
type ATildeRow = ((u64, u64), (u64, u64), u64, u64, TraceStats);

/// Honest-vs-attacked transcript comparison on `toy_commit(n, d)`, with the
/// per-trial exact checks on the attacker's samples and trace.
pub fn a_tilde_distribution(n: u32, d: u32, k: u32, trials: u64, master: &Seed) -> Result<ATildeReport> {
    if d > 5 {
        return Err(Error::Budget(format!("relation classes enumerate 2^(d+1) subsets; d = {d} too large")));
    }
    let scheme = toy_commit(n, d)?;
    let p = &scheme.protocol;
    let rows: Vec<ATildeRow> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ts = trial_seed(master, "atilde/trial", t);
            let mut world = World::new(prf(&ts, "world", &[]));
            let mut r = seed::rng(&prf(&ts, "honest", &[]));
            let (b, x, rc) = (r.gen::<u64>() & 1, r.gen::<u64>() & mask(n), r.gen::<u64>() & mask(n * d));
            let honest = p.run_transcript(&mut world.adversary(), (b, x), (0, rc))?;
            let rc2 = seed::rng(&prf(&ts, "receiver", &[])).gen::<u64>() & mask(n * d);
            let mut session = ReceiverSession::new(p, rc2);
            let mut sam = SamOracle::new(HashFamily::new(prf(&ts, "sam", &[])));
            let run = a_tilde(p, &mut session, &mut world, &mut sam, k)?;
            let mut bad = 0;
            for &s in &run.samples {
                let o = opening(&scheme, s);
                if !p.replay(Side::A, o.value, o.coins, &run.transcript, &mut world.adversary())? {
                    bad += 1;
                }
            }
            Ok((
                toy_projection(n, d, &honest),
                toy_projection(n, d, &run.transcript),
                run.samples.len() as u64,
                bad,
                sam.stats(),
            ))
        })
        .collect::<Result<_>>()?;
    let mut cells: BTreeMap<(u64, u64), (u64, u64)> = BTreeMap::new();
    for r in &rows {
        cells.entry(r.0).or_default().0 += 1;
        cells.entry(r.1).or_default().1 += 1;
    }
    let (a, b): (Vec<u64>, Vec<u64>) = cells.values().copied().unzip();
    let stats_all: Vec<&TraceStats> = rows.iter().map(|r| &r.4).collect();
    Ok(ATildeReport {
        n,
        d,
        k,
        trials,
        tv: stats::tv_counts(&a, &b),
        cells: cells.len(),
        samples_checked: rows.iter().map(|r| r.2).sum(),
        consistency_failures: rows.iter().map(|r| r.3).sum(),
        sam_count_mismatches: stats_all.iter().filter(|s| s.sam_calls != (d + k) as u64).count() as u64,
        depth_violations: stats_all.iter().filter(|s| s.depth > d + 1).count() as u64,
        traces: TraceSummary::of(stats_all),
    })
}

// ---------------------------------------------------------------- Inv

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvReport {
    pub function: String,
    pub m: u32,
    pub ell: u32,
    pub k: u32,
    pub d: u32,
    pub eps: f64,
    pub budget: u64,
    pub trials: u64,
    pub aborts: u64,
    pub abort_rate: f64,
    pub abort_se: f64,
    /// Returned values that are not preimages.
    pub wrong_preimages: u64,
    pub mean_loop_calls: f64,
    pub traces: TraceSummary,
}

/// `inv` on `f` = first `keep` of `m` input bits, targets `f(x)` for uniform `x`.
pub fn inv_truncate(m: u32, keep: u32, k: u32, d: u32, eps: f64, trials: u64, master: &Seed) -> Result<InvReport> {
    let f = Program::truncate(m, keep);
    let p = InvParams::new(k, d, eps)?;
    let rows: Vec<(bool, u64, u64, TraceStats)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ts = trial_seed(master, "inv/trial", t);
            let y = seed::rng(&ts).gen::<u64>() & mask(keep);
            let mut world = World::new(prf(&ts, "world", &[]));
            let mut sam = SamOracle::new(HashFamily::new(prf(&ts, "sam", &[])));
            let out = inv(&f, y, &p, &mut LiveEnv::new(&mut world, &mut sam)).map_err(live_err)?;
            let wrong = match &out.preimages {
                Some(xs) => xs.iter().filter(|&&x| x & mask(keep) != y).count() as u64,
                None => 0,
            };
            Ok((out.preimages.is_none(), wrong, out.loop_calls, sam.stats()))
        })
        .collect::<Result<_>>()?;
    let aborts = rows.iter().filter(|r| r.0).count() as u64;
    Ok(InvReport {
        function: format!("truncate({m},{keep})"),
        m,
        ell: keep,
        k,
        d,
        eps,
        budget: p.budget(keep),
        trials,
        aborts,
        abort_rate: aborts as f64 / trials.max(1) as f64,
        abort_se: stats::rate_se(aborts, trials),
        wrong_preimages: rows.iter().map(|r| r.1).sum(),
        mean_loop_calls: rows.iter().map(|r| r.2 as f64).sum::<f64>() / trials.max(1) as f64,
        traces: TraceSummary::of(rows.iter().map(|r| &r.3)),
    })
}

// ---------------------------------------------------------------- binding

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakRoundReport {
    pub scheme: String,
    pub n: u32,
    pub rounds: u32,
    pub k: u32,
    pub two_openings_rate: f64,
    pub binding: BindingReport,
}

pub fn break_round(n: u32, rounds: u32, k: u32, trials: u64, master: &Seed) -> Result<BreakRoundReport> {
    let scheme = toy_commit(n, rounds)?;
    let binding = binding_break_rate(&scheme, &STildeRound { k }, trials, master)?;
    Ok(BreakRoundReport { scheme: scheme.protocol.name.clone(), n, rounds, k, two_openings_rate: binding.rate, binding })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakCommReport {
    pub scheme: String,
    pub n: u32,
    /// Sender bits in the commit stage.
    pub c: u32,
    pub d: u32,
    pub eps: f64,
    pub k: u32,
    /// `d * 2^ceil(c/d) / eps`.
    pub budget: u64,
    pub two_openings_rate: f64,
    pub binding: BindingReport,
}

/// `toy_commit(n, c - 1)` has `c` sender bits; broken with the
/// communication-based breaker.
pub fn break_comm(n: u32, c: u32, d: u32, eps: f64, trials: u64, master: &Seed) -> Result<BreakCommReport> {
    if c < 2 {
        return Err(Error::Param(format!("toy scheme needs c >= 2 sender bits, got {c}")));
    }
    let scheme = toy_commit(n, c - 1)?;
    let sent = scheme.protocol.comm_bits(Side::A);
    if sent != c {
        return Err(Error::Internal(format!("scheme sends {sent} bits, expected {c}")));
    }
    let params = InvParams::new(n, d, eps)?;
    let binding = binding_break_rate(&scheme, &STildeComm { params }, trials, master)?;
    Ok(BreakCommReport {
        scheme: scheme.protocol.name.clone(),
        n,
        c,
        d,
        eps,
        k: n,
        budget: params.budget(c),
        two_openings_rate: binding.rate,
        binding,
    })
}

// ---------------------------------------------------------------- tradeoff

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub d: u32,
    pub v: u32,
    /// `d * 2^v`.
    pub predicted: u64,
    /// Smallest loop budget at which at least half the runs succeed.
    pub knee: u64,
    pub ratio: f64,
    pub mean_loop_calls: f64,
    /// `(budget multiplier over predicted, success rate)`.
    pub curve: Vec<(f64, f64)>,
    pub traces: TraceSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffReport {
    pub n: u32,
    pub trials: u64,
    pub points: Vec<TradeoffPoint>,
    pub max_ratio_deviation: f64,
}

pub const CURVE_MULTIPLIERS: [f64; 9] = [0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

/// Unbounded blockwise inversion of `pi_n` at each depth; the success curve
/// at budget `B` is the fraction of runs whose last rejected answer came at
/// or before loop call `B`.
pub fn invert_tradeoff(n: u32, depths: &[u32], trials: u64, master: &Seed) -> Result<TradeoffReport> {
    if n > 14 {
        return Err(Error::Budget(format!("tradeoff sweep tabulates pi_n; n = {n} above 14")));
    }
    let mut points = Vec::new();
    for &d in depths {
        if d == 0 || d > n {
            return Err(Error::Param(format!("depth {d} outside 1..={n}")));
        }
        let v = n.div_ceil(d);
        let predicted = d as u64 * (1u64 << v);
        let rows: Vec<(u64, u64, TraceStats)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let ts = derive(&trial_seed(master, "tradeoff/depth", d as u64), "trial", t);
                let mut world = fixed_world(prf(&ts, "world", &[]), n)?;
                let x0 = seed::rng(&ts).gen::<u64>() & mask(n);
                let y = world.perm(n)?.eval(x0)?;
                let mut sam = SamOracle::new(HashFamily::new(prf(&ts, "sam", &[])));
                let out = inv_with_budget(&Program::apply_perm(n), y, 1, d, u64::MAX, &mut LiveEnv::new(&mut world, &mut sam))
                    .map_err(live_err)?;
                if out.preimages.as_ref().map(|xs| xs[0]) != Some(x0) {
                    return Err(Error::Internal("unbounded inversion returned a wrong preimage".into()));
                }
                Ok((out.last_miss, out.loop_calls, sam.stats()))
            })
            .collect::<Result<_>>()?;
        let mut misses: Vec<u64> = rows.iter().map(|r| r.0).collect();
        misses.sort_unstable();
        let knee = misses[(misses.len() - 1) / 2];
        let curve = CURVE_MULTIPLIERS
            .iter()
            .map(|&mu| {
                let b = (mu * predicted as f64).floor() as u64;
                (mu, misses.iter().filter(|&&m| m <= b).count() as f64 / trials as f64)
            })
            .collect();
        points.push(TradeoffPoint {
            d,
            v,
            predicted,
            knee,
            ratio: knee as f64 / predicted as f64,
            mean_loop_calls: rows.iter().map(|r| r.1 as f64).sum::<f64>() / trials as f64,
            curve,
            traces: TraceSummary::of(rows.iter().map(|r| &r.2)),
        });
    }
    let max_ratio_deviation = points.iter().map(|p| p.ratio.max(1.0 / p.ratio)).fold(1.0, f64::max);
    Ok(TradeoffReport { n, trials, points, max_ratio_deviation })
}

/// CSV rows `d,v,predicted,multiplier,budget,success`.
pub fn tradeoff_csv(r: &TradeoffReport) -> String {
    let mut s = String::from("d,v,predicted,multiplier,budget,success\n");
    for p in &r.points {
        for (mu, rate) in &p.curve {
            s.push_str(&format!("{},{},{},{},{},{}\n", p.d, p.v, p.predicted, mu, (mu * p.predicted as f64).floor(), rate));
        }
    }
    s
}

// ---------------------------------------------------------------- monitor

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub n: u32,
    pub d: u32,
    pub trials: u64,
    pub successes: u64,
    /// Successful runs where the monitor returned the preimage no later than
    /// the first hitting Sam call.
    pub no_later: u64,
    pub rate: f64,
    /// Monitor cost over adversary cost, worst run.
    pub max_cost_ratio: f64,
}

pub fn monitor_vs_hits(n: u32, d: u32, eps: f64, trials: u64, master: &Seed) -> Result<MonitorReport> {
    let adv = SamPermInverter { n, d, eps };
    let rows: Vec<Option<(bool, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ts = trial_seed(master, "monitor/trial", t);
            let mut world = fixed_world(prf(&ts, "world", &[]), n)?;
            let y = seed::rng(&ts).gen::<u64>() & mask(n);
            let x = world.perm(n)?.invert(y)?;
            let h = HashFamily::new(prf(&ts, "sam", &[]));
            let mut sam = SamOracle::new(h.clone());
            if run_live(&adv, y, &mut world, &mut sam)? != Some(x) {
                return Ok(None);
            }
            let hit = first_hit(sam.trace(), &mut world, n, y)?;
            let base = sam.stats().augmented_cost.max(1) as f64;
            let mut msam = SamOracle::new(h);
            let m = hit_monitor(&adv, y, &mut world, &mut msam)?;
            let ok = m.found == Some(x) && matches!((m.found_at, hit), (Some(a), Some(b)) if a <= b);
            Ok(Some((ok, m.stats.augmented_cost as f64 / base)))
        })
        .collect::<Result<_>>()?;
    let done: Vec<(bool, f64)> = rows.into_iter().flatten().collect();
    let no_later = done.iter().filter(|r| r.0).count() as u64;
    Ok(MonitorReport {
        n,
        d,
        trials,
        successes: done.len() as u64,
        no_later,
        rate: no_later as f64 / done.len().max(1) as f64,
        max_cost_ratio: done.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

// ---------------------------------------------------------------- reconstruction

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionStats {
    pub adversary: String,
    pub trials: u64,
    pub round_trips: u64,
    /// Trials whose payload exceeds the size formula.
    pub size_violations: u64,
    /// Trials with `a >= 2` whose payload is not below `ceil(log2(2^n!))`.
    pub strict_violations: u64,
    pub trials_a_ge_2: u64,
    pub min_a: u64,
    pub max_a: u64,
    pub mean_payload_bits: f64,
    pub mean_invertible: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub n: u32,
    pub full_bits: u64,
    pub adversaries: Vec<ReconstructionStats>,
}

pub const RECONSTRUCTION_ADVERSARIES: [&str; 3] = ["brute_force", "quarter_table", "sam_scan"];

fn build_adversary(name: &str, world: &mut World, n: u32) -> Result<Box<dyn Adversary>> {
    Ok(match name {
        "brute_force" => Box::new(BruteForce { n }),
        "quarter_table" => Box::new(QuarterTable::from_world(world, n)?),
        "sam_scan" => Box::new(SamScan { n }),
        other => return Err(Error::Param(format!("unknown adversary {other}"))),
    })
}

/// Encode, serialize, parse and decode `trials` random permutations per adversary.
pub fn reconstruction_round_trips(n: u32, adversaries: &[&str], trials: u64, master: &Seed) -> Result<ReconstructionReport> {
    if n > reconstruction::MAX_SWEEP_BITS {
        return Err(Error::Budget(format!("reconstruction sweeps need n <= {}", reconstruction::MAX_SWEEP_BITS)));
    }
    let full = reconstruction::full_bits(n);
    let mut out = Vec::new();
    for (ai, &name) in adversaries.iter().enumerate() {
        let rows: Vec<(bool, u64, u64, u64)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let ts = derive(&trial_seed(master, "reconstruct/adversary", ai as u64), "trial", t);
                let mut world = fixed_world(prf(&ts, "world", &[]), n)?;
                let h = HashFamily::new(prf(&ts, "sam", &[]));
                let adv = build_adversary(name, &mut world, n)?;
                let rep = reconstruction::encode(adv.as_ref(), &mut world, &h)?;
                let blob = rep.aux.to_bytes();
                let aux = Aux::from_bytes(&blob)?;
                let mut context = World::new(prf(&ts, "context", &[]));
                let dec = reconstruction::decode(&aux, adv.as_ref(), &h, &mut context)?;
                let ok = aux == rep.aux && dec.table == world.perm(n)?.table();
                Ok((ok, aux.a(), aux.size().payload_bits, rep.invertible as u64))
            })
            .collect::<Result<_>>()?;
        let ge2: Vec<_> = rows.iter().filter(|r| r.1 >= 2).collect();
        out.push(ReconstructionStats {
            adversary: name.to_string(),
            trials,
            round_trips: rows.iter().filter(|r| r.0).count() as u64,
            size_violations: rows.iter().filter(|r| r.2 > reconstruction::size_bound_bits(n, r.1)).count() as u64,
            strict_violations: ge2.iter().filter(|r| r.2 >= full).count() as u64,
            trials_a_ge_2: ge2.len() as u64,
            min_a: rows.iter().map(|r| r.1).min().unwrap_or(0),
            max_a: rows.iter().map(|r| r.1).max().unwrap_or(0),
            mean_payload_bits: rows.iter().map(|r| r.2 as f64).sum::<f64>() / trials.max(1) as f64,
            mean_invertible: rows.iter().map(|r| r.3 as f64).sum::<f64>() / trials.max(1) as f64,
        });
    }
    Ok(ReconstructionReport { n, full_bits: full, adversaries: out })
}

// ---------------------------------------------------------------- hiding

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PirHidingReport {
    pub params: ComParams,
    pub clear_index: PirHiding,
    pub full_download: PirHiding,
    /// The extractor is Toeplitz hashing with this seed length, not a
    /// `d`-bit seed.
    pub extractor_seed_len: u32,
}

/// Hiding distance of `toy_commit(n, d)` between committed bits 0 and 1.
pub fn toy_hiding(n: u32, d: u32, samples: u64, master: &Seed) -> Result<HidingEstimate> {
    let scheme = toy_commit(n, d)?;
    let mut world = World::new(prf(master, "hiding/world", &[]));
    hiding_distance(&scheme, &mut world, 0, 1, samples, &prf(master, "hiding/toy", &[]))
}

/// PIR-based commitment over `clear_index` and the `full_download` control,
/// secrets all-zero against all-one.
pub fn pir_hiding(params: ComParams, trials: u64, master: &Seed) -> Result<PirHidingReport> {
    let n = params.n;
    let ci = PirCom::new(pir::clear_index(n)?, params)?;
    let fd = PirCom::new(pir::full_download(n)?, params)?;
    let s1 = mask(ci.ext.out_len);
    Ok(PirHidingReport {
        params,
        clear_index: pir::com_hiding_estimate(&ci, 0, s1, trials, &prf(master, "hiding/clear_index", &[]))?,
        full_download: pir::com_hiding_estimate(&fd, 0, s1, trials, &prf(master, "hiding/full_download", &[]))?,
        extractor_seed_len: ci.ext.seed_len(),
    })
}

// ---------------------------------------------------------------- alpha / beta

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelDiff {
    /// Depth of the child query in the chain.
    pub level: usize,
    pub pairs: u64,
    pub mean_alpha_next: f64,
    pub mean_beta: f64,
    pub diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaReport {
    pub m: u32,
    pub runs: u64,
    pub pairs: u64,
    pub mean_alpha_next: f64,
    pub mean_beta: f64,
    pub diff: f64,
    pub diff_se: f64,
    pub levels: Vec<LevelDiff>,
    pub hits: u64,
}

/// Pools `(alpha_child, beta_parent)` over every parent link of
/// [`ChainAdversary`] runs on random `(pi, h, y)`.
pub fn alpha_beta_experiment(runs: u64, master: &Seed) -> Result<AlphaBetaReport> {
    let n = ChainAdversary::N;
    let rows: Vec<Vec<(usize, f64, f64, bool)>> = (0..runs)
        .into_par_iter()
        .map(|t| {
            let ts = trial_seed(master, "alphabeta/run", t);
            let mut world = fixed_world(prf(&ts, "world", &[]), n)?;
            let y = seed::rng(&ts).gen::<u64>() & mask(n);
            let mut sam = SamOracle::new(HashFamily::new(prf(&ts, "sam", &[])));
            let tr = alpha_beta_trace(&ChainAdversary, y, &mut world, &mut sam)?;
            let mut out = Vec::new();
            for (i, s) in tr.steps.iter().enumerate() {
                if let Some(p) = s.parent {
                    out.push((i, s.alpha, tr.steps[p].beta, s.hit));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, f64, f64, bool)> = rows.into_iter().flatten().collect();
    let diffs: Vec<f64> = pairs.iter().map(|p| p.1 - p.2).collect();
    let (diff, diff_se) = stats::mean_se(&diffs);
    let np = pairs.len().max(1) as f64;
    let mut levels: BTreeMap<usize, (u64, f64, f64)> = BTreeMap::new();
    for p in &pairs {
        let e = levels.entry(p.0).or_default();
        e.0 += 1;
        e.1 += p.1;
        e.2 += p.2;
    }
    Ok(AlphaBetaReport {
        m: n,
        runs,
        pairs: pairs.len() as u64,
        mean_alpha_next: pairs.iter().map(|p| p.1).sum::<f64>() / np,
        mean_beta: pairs.iter().map(|p| p.2).sum::<f64>() / np,
        diff,
        diff_se,
        levels: levels
            .into_iter()
            .map(|(level, (c, a, b))| LevelDiff {
                level,
                pairs: c,
                mean_alpha_next: a / c as f64,
                mean_beta: b / c as f64,
                diff: (a - b) / c as f64,
            })
            .collect(),
        hits: pairs.iter().filter(|p| p.3).count() as u64,
    })
}

// ---------------------------------------------------------------- PIR binding

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PirBindingReport {
    pub params: ComParams,
    pub baseline: f64,
    /// `1/n + 1/n^2`: the prediction rate a breaker that always succeeds must reach.
    pub predict_bound: f64,
    pub reduction: ReductionReport,
    pub sender_bits: u32,
    pub extractor_seed_len: u32,
}

pub fn pir_binding(params: ComParams, trials: u64, master: &Seed) -> Result<PirBindingReport> {
    let com = PirCom::new(pir::clear_index(params.n)?, params)?;
    let n = params.n as f64;
    Ok(PirBindingReport {
        params,
        baseline: 1.0 / n,
        predict_bound: 1.0 / n + 1.0 / (n * n),
        reduction: pir::binding_reduction(&com, &OmniscientClearIndex, trials, master)?,
        sender_bits: com.sender_bits(),
        extractor_seed_len: com.ext.seed_len(),
    })
}

// ---------------------------------------------------------------- normal form

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionReport {
    pub clean_passes: bool,
    pub duplicate_flagged: bool,
    pub orphan_flagged: bool,
}

/// A clean two-query chain, the same with a repeated `C_next`, and the same
/// with the child's `w` changed so it has no parent.
pub fn corrupted_trace_check(master: &Seed) -> Result<CorruptionReport> {
    let c1 = Program::truncate(8, 2);
    let c2 = Program::extend(&c1, &Program::truncate(8, 1).ext_trivial(1)?)?;
    let mut sam = SamOracle::new(HashFamily::new(*master));
    let o = &mut crate::oracle::NoOracle;
    let w = sam.query(o, SamQuery::root(c1.clone()))?;
    sam.query(o, SamQuery::child(w, c1.clone(), c2.clone()))?;
    let clean = sam.records();
    let has = |recs: &[TraceRecord], k: ViolationKind| TraceStats::compute(recs).violations.iter().any(|v| v.kind == k);
    let mut dup = clean.clone();
    dup.push(clean[0].clone());
    let mut orphan = clean.clone();
    if let TraceRecord::Sam { w, .. } = &mut orphan[1] {
        *w = w.map(|v| v ^ 1);
    }
    Ok(CorruptionReport {
        clean_passes: TraceStats::compute(&clean).normal_form,
        duplicate_flagged: has(&dup, ViolationKind::DuplicateNext),
        orphan_flagged: has(&orphan, ViolationKind::Orphan),
    })
}

// ---------------------------------------------------------------- demo

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamDemoReport {
    pub m: u32,
    pub program: String,
    pub answers: Vec<u64>,
    pub records: Vec<TraceRecord>,
    pub stats: TraceStats,
}

/// A short normal-form chain on `pi_m`: root query on the first half of
/// `pi_m(w)`, then successive extensions up to the full output.
pub fn sam_demo(m: u32, master: &Seed) -> Result<SamDemoReport> {
    if !(2..=16).contains(&m) {
        return Err(Error::Budget(format!("sam-demo runs at 2 <= m <= 16, got {m}")));
    }
    let mut world = fixed_world(prf(master, "demo/world", &[]), m)?;
    let mut sam = SamOracle::new(HashFamily::new(prf(master, "demo/sam", &[])));
    let f = Program::apply_perm(m);
    let lens: Vec<u32> = (1..=m.min(4)).map(|i| (i * m).div_ceil(m.min(4))).collect();
    let chain = Program::prefix_chain(&f, &lens)?;
    let mut answers = Vec::new();
    let mut prev: Option<(u64, Program)> = None;
    for c in &chain {
        let q = match &prev {
            None => SamQuery::root(c.clone()),
            Some((w, p)) => SamQuery::child(*w, p.clone(), c.clone()),
        };
        let a = sam.query(&mut world.adversary(), q)?;
        sam.direct(&mut world.adversary(), OracleName::Perm(m as u8), a)?;
        answers.push(a);
        prev = Some((a, c.clone()));
    }
    Ok(SamDemoReport { m, program: format!("prefixes of pi_{m}"), answers, records: sam.records(), stats: sam.stats() })
}
