//! Sam-aided attacks: the round-by-round coin sampler, the blockwise inverter,
//! the binding breakers built on them, the hit monitor and the alpha/beta
//! diagnostics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{eval_via, Adversary, Interrupt, LiveEnv, MonitorEnv, SamAccess, Step};
use crate::circuit::{mask, Program};
use crate::error::{Error, Result};
use crate::oracle::{DomainParam, OracleName, PermutationOracle, World};
use crate::protocol::{
    play_honest, BindingAttacker, CommitmentScheme, Decommitment, Protocol, ReceiverSession, Side,
};
use crate::sam::{hit_events, hits, SamOracle, SamQuery, TraceEntry, TraceStats};
use crate::seed::{self, Seed};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvParams {
    pub k: u32,
    pub d: u32,
    pub eps: f64,
}

impl InvParams {
    pub fn new(k: u32, d: u32, eps: f64) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(Error::Param(format!("inv needs k, d >= 1, got k={k}, d={d}")));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Param(format!("inv needs 0 < eps <= 1, got {eps}")));
        }
        Ok(InvParams { k, d, eps })
    }

    /// Block width `v = ceil(l / d)`.
    pub fn block_width(&self, ell: u32) -> u32 {
        ell.div_ceil(self.d)
    }

    /// Loop budget `d * 2^v / eps`, rounded down.
    pub fn budget(&self, ell: u32) -> u64 {
        let b = self.d as f64 * (self.block_width(ell) as f64).exp2() / self.eps;
        if b >= u64::MAX as f64 {
            u64::MAX
        } else {
            b.floor() as u64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvOutcome {
    /// `None` when the loop budget ran out.
    pub preimages: Option<Vec<u64>>,
    pub loop_calls: u64,
    /// Loop-call count at the last rejected answer; a run with budget `B`
    /// succeeds exactly when this is at most `B`.
    pub last_miss: u64,
    pub output_calls: u64,
    pub budget: u64,
    pub block_width: u32,
    pub blocks: u32,
}

/// Blockwise inverter. `f_i` is the first `min(i v, l)` output bits of `f`;
/// block `i` repeats `Sam(x_{i-1}, f*_{i-1}, ext_j(f_i))` for `j = 1, 2, ...`
/// until the answer matches the first `i` blocks of `y`, and the accepted
/// extension becomes `f*_i`. More than `budget` loop calls gives up. On
/// success the outputs are `Sam(x_last, f*_last, ext_j(f*_last))` for
/// `j = 1..=k`.
pub fn inv(f: &Program, y: u64, p: &InvParams, env: &mut dyn SamAccess) -> Step<InvOutcome> {
    inv_with_budget(f, y, p.k, p.d, p.budget(f.output_len()), env)
}

pub fn inv_with_budget(f: &Program, y: u64, k: u32, d: u32, budget: u64, env: &mut dyn SamAccess) -> Step<InvOutcome> {
    let ell = f.output_len();
    if ell < 64 && y >> ell != 0 {
        return Err(Interrupt::Fail(Error::Param(format!("target wider than {ell} bits"))));
    }
    let v = ell.div_ceil(d.max(1));
    let blocks = if v == 0 { 0 } else { ell.div_ceil(v) };
    let lens: Vec<u32> = (1..=blocks).map(|i| (i * v).min(ell)).collect();
    let chain = Program::prefix_chain(f, &lens)?;
    let mut prev: Option<(u64, Program)> = None;
    let mut loop_calls = 0u64;
    let mut out = InvOutcome { preimages: None, loop_calls: 0, last_miss: 0, output_calls: 0, budget, block_width: v, blocks };
    for (fi, &len) in chain.iter().zip(&lens) {
        let target = y & mask(len);
        let mut j = 0;
        loop {
            j += 1;
            let next = fi.ext_trivial(j)?;
            let q = match &prev {
                None => SamQuery::root(next.clone()),
                Some((x, c)) => SamQuery::child(*x, c.clone(), next.clone()),
            };
            let x = env.sam(q)?;
            loop_calls += 1;
            if eval_via(env, fi, x)? == target {
                prev = Some((x, next));
                break;
            }
            out.last_miss = loop_calls;
            if loop_calls > budget {
                out.loop_calls = loop_calls;
                return Ok(out);
            }
        }
    }
    let mut xs = Vec::with_capacity(k as usize);
    for j in 1..=k {
        let q = match &prev {
            None => SamQuery::root(f.ext_trivial(j)?),
            Some((x, c)) => SamQuery::child(*x, c.clone(), c.ext_trivial(j)?),
        };
        xs.push(env.sam(q)?);
    }
    out.loop_calls = loop_calls;
    out.output_calls = k as u64;
    out.preimages = Some(xs);
    Ok(out)
}

/// Result of the round-by-round sampler.
#[derive(Clone, Debug)]
pub struct ATildeRun {
    pub transcript: Vec<u64>,
    /// Full strategy inputs `input | coins << input_len`.
    pub samples: Vec<u64>,
    pub programs: Vec<Program>,
}

/// Plays the sender of `protocol` against `session` using Sam: for its `i`-th
/// message it asks `Sam(r_{i-1}, A_{i-1}, A_i)` (a root query for `i = 1`)
/// with `A_i` the strategy program for the receiver messages seen so far,
/// and sends the `i`-th message of `A_i(r_i)`. Afterwards it draws
/// `Sam(r_d, A_d, ext_j(A_d))` for `j = 1..=k`.
pub fn a_tilde(
    protocol: &Protocol,
    session: &mut ReceiverSession<'_>,
    world: &mut World,
    sam: &mut SamOracle,
    k: u32,
) -> Result<ATildeRun> {
    let mut programs: Vec<Program> = Vec::new();
    let mut r: Option<u64> = None;
    let mut offset = 0u32;
    loop {
        session.pump(&mut world.adversary())?;
        if session.done() {
            break;
        }
        let i = programs.len() + 1;
        let peers = session.receiver_messages();
        let ai = protocol.strategy_program(Side::A, &peers, i)?;
        let q = match (r, programs.last()) {
            (Some(w), Some(prev)) => SamQuery::child(w, prev.clone(), ai.clone()),
            _ => SamQuery::root(ai.clone()),
        };
        let ri = sam.query(&mut world.adversary(), q)?;
        let mut calls = Vec::new();
        let out = ai.eval_observed(ri, &mut world.adversary(), |c| calls.push(*c))?;
        for c in calls {
            sam.record_direct(c.oracle, c.input, c.output);
        }
        let len = ai.output_len() - offset;
        session.send(out >> offset & mask(len))?;
        offset += len;
        r = Some(ri);
        programs.push(ai);
    }
    let mut samples = Vec::with_capacity(k as usize);
    let last = match programs.last() {
        Some(p) => p.clone(),
        None => protocol.strategy_program(Side::A, &[], 0)?,
    };
    for j in 1..=k {
        let q = match r {
            Some(w) => SamQuery::child(w, last.clone(), last.ext_trivial(j)?),
            None => SamQuery::root(last.ext_trivial(j)?),
        };
        samples.push(sam.query(&mut world.adversary(), q)?);
    }
    Ok(ATildeRun { transcript: session.transcript().to_vec(), samples, programs })
}

/// Splits a full strategy input into a decommitment.
pub fn opening(scheme: &CommitmentScheme, x: u64) -> Decommitment {
    let l = scheme.value_len();
    Decommitment { value: x & mask(l), coins: x >> l }
}

/// First pair `(j, j')`, `j < j'` in index order, of samples opening to
/// different values.
pub fn two_openings(scheme: &CommitmentScheme, samples: &[u64]) -> Option<(Decommitment, Decommitment)> {
    for (a, &x) in samples.iter().enumerate() {
        for &z in &samples[a + 1..] {
            let (d0, d1) = (opening(scheme, x), opening(scheme, z));
            if d0.value != d1.value {
                return Some((d0, d1));
            }
        }
    }
    None
}

/// Binding breaker for low-round schemes: run the sampler with `k` outputs
/// and open to any two distinct values among them.
#[derive(Clone, Copy, Debug)]
pub struct STildeRound {
    pub k: u32,
}

impl BindingAttacker for STildeRound {
    fn name(&self) -> String {
        format!("s_tilde_round(k={})", self.k)
    }

    fn attack(
        &self,
        scheme: &CommitmentScheme,
        session: &mut ReceiverSession<'_>,
        world: &mut World,
        sam: &mut SamOracle,
        _seed: &Seed,
    ) -> Result<Option<(Decommitment, Decommitment)>> {
        let run = a_tilde(&scheme.protocol, session, world, sam, self.k)?;
        Ok(two_openings(scheme, &run.samples))
    }
}

/// Sender coins to sender messages with the receiver's messages fixed from
/// `transcript`, plus the packed sender messages (first message lowest).
pub fn g_trans(protocol: &Protocol, transcript: &[u64]) -> Result<(Program, u64)> {
    if transcript.len() != protocol.schedule.len() {
        return Err(Error::Schedule("g_trans needs a complete transcript".into()));
    }
    let peers = protocol.messages_of(Side::B, transcript);
    let g = protocol.strategy_program(Side::A, &peers, protocol.rounds(Side::A))?;
    let mut y = 0u64;
    let mut off = 0u32;
    for (s, m) in protocol.schedule.iter().zip(transcript) {
        if s.from == Side::A {
            y |= m << off;
            off += s.len;
        }
    }
    Ok((g, y))
}

/// Samples sender inputs consistent with a finished transcript by inverting
/// `g_trans` on the sender's part of it.
pub fn comm_inv(protocol: &Protocol, transcript: &[u64], p: &InvParams, env: &mut dyn SamAccess) -> Step<InvOutcome> {
    let (g, y) = g_trans(protocol, transcript)?;
    inv(&g, y, p, env)
}

/// Binding breaker for low-communication schemes: commit to 0 honestly, then
/// sample `k` consistent openings with [`comm_inv`].
#[derive(Clone, Copy, Debug)]
pub struct STildeComm {
    pub params: InvParams,
}

impl BindingAttacker for STildeComm {
    fn name(&self) -> String {
        format!("s_tilde_comm(k={}, d={}, eps={})", self.params.k, self.params.d, self.params.eps)
    }

    fn attack(
        &self,
        scheme: &CommitmentScheme,
        session: &mut ReceiverSession<'_>,
        world: &mut World,
        sam: &mut SamOracle,
        seed: &Seed,
    ) -> Result<Option<(Decommitment, Decommitment)>> {
        let coins = seed::rng(seed).gen::<u64>() & mask(scheme.protocol.a.coin_len);
        play_honest(scheme, session, world, 0, coins)?;
        let t = session.transcript().to_vec();
        let mut env = LiveEnv::new(world, sam);
        let out = comm_inv(&scheme.protocol, &t, &self.params, &mut env).map_err(|i| match i {
            Interrupt::Fail(e) => e,
            other => Error::Internal(format!("{other:?} in live run")),
        })?;
        Ok(out.preimages.and_then(|xs| two_openings(scheme, &xs)))
    }
}

/// Inverts `pi_n` with the blockwise inverter applied to `w -> pi_n(w)`.
#[derive(Clone, Copy, Debug)]
pub struct SamPermInverter {
    pub n: u32,
    pub d: u32,
    pub eps: f64,
}

impl Adversary for SamPermInverter {
    fn name(&self) -> String {
        format!("sam_perm_inverter(n={}, d={}, eps={})", self.n, self.d, self.eps)
    }

    fn n(&self) -> u32 {
        self.n
    }

    fn run(&self, y: u64, env: &mut dyn SamAccess) -> Step<Option<u64>> {
        let p = InvParams::new(1, self.d, self.eps)?;
        let out = inv(&Program::apply_perm(self.n), y, &p, env)?;
        Ok(out.preimages.map(|xs| xs[0]))
    }
}

/// A world whose `pi_n` is fully tabulated, so answers do not depend on query order.
pub fn fixed_world(seed: Seed, n: u32) -> Result<World> {
    let mut w = World::new(seed);
    w.set_perm(PermutationOracle::full_table(DomainParam::new(n)?, seed::prf(&seed, "fixed/perm", &[n as u8]))?);
    Ok(w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorOutcome {
    pub found: Option<u64>,
    /// Sam-call position after which the preimage was found.
    pub found_at: Option<usize>,
    pub stats: TraceStats,
}

/// Emulates `adv` on `y`; after each Sam answer `w` to `(., ., C_next)` it
/// evaluates `C_next(w)` and returns the input of the first `pi_n` call that
/// outputs `y`. Gives `None` when the emulation ends without that.
pub fn hit_monitor(adv: &dyn Adversary, y: u64, world: &mut World, sam: &mut SamOracle) -> Result<MonitorOutcome> {
    let n = adv.n();
    let (found, found_at) = {
        let mut env = MonitorEnv::new(LiveEnv::new(world, sam), n, y);
        match adv.run(y, &mut env) {
            Ok(_) => (None, None),
            Err(Interrupt::Found(x)) => (Some(x), env.found_at),
            Err(Interrupt::Fail(e)) => return Err(e),
            Err(Interrupt::Halt(x)) => return Err(Error::Internal(format!("halt at {x} in live run"))),
        }
    };
    Ok(MonitorOutcome { found, found_at, stats: sam.stats() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaStep {
    pub alpha: f64,
    pub beta: f64,
    /// Whether `C` evaluated on the actual answer hits.
    pub hit: bool,
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaTrace {
    pub y: u64,
    pub steps: Vec<AlphaBetaStep>,
}

pub const ALPHA_BETA_MAX_BITS: u32 = 12;

/// Runs `adv` live and, for every Sam query `(W_i, C_i, C_{i+1})`, computes
/// by enumeration over `D_i = C_i^{-1}(C_i(W_i))` (everything for a root
/// query) `alpha_i = Pr[hit(C_i, w)]` and `beta_i = Pr[hit(C_{i+1}, w)]`.
pub fn alpha_beta_trace(adv: &dyn Adversary, y: u64, world: &mut World, sam: &mut SamOracle) -> Result<AlphaBetaTrace> {
    let n = adv.n();
    crate::adversary::run_live(adv, y, world, sam)?;
    let stats = sam.stats();
    let mut steps = Vec::new();
    let mut k = 0usize;
    for e in sam.trace() {
        let TraceEntry::Sam { query, answer } = e else { continue };
        let m = query.m();
        if m > ALPHA_BETA_MAX_BITS {
            return Err(Error::Budget(format!("alpha/beta enumeration needs m <= {ALPHA_BETA_MAX_BITS}, got {m}")));
        }
        let o = &mut world.adversary();
        let (mut size, mut a, mut b) = (0u64, 0u64, 0u64);
        let target = match (&query.c, query.w) {
            (Some(c), Some(w)) => Some(c.eval_plain(w, o)?),
            _ => None,
        };
        for w in 0..1u64 << m {
            if let (Some(c), Some(t)) = (&query.c, target) {
                if c.eval_plain(w, o)? != t {
                    continue;
                }
                a += hits(c, w, o, n, y)? as u64;
            }
            size += 1;
            b += hits(&query.c_next, w, o, n, y)? as u64;
        }
        let hit = match &query.c {
            Some(c) => hits(c, *answer, o, n, y)?,
            None => false,
        };
        steps.push(AlphaBetaStep {
            alpha: a as f64 / size as f64,
            beta: b as f64 / size as f64,
            hit,
            parent: stats.forest.parents[k],
        });
        k += 1;
    }
    Ok(AlphaBetaTrace { y, steps })
}

/// Single-path adversary on 8-bit inputs used for the alpha/beta identity:
/// `C_2` is two bits of `pi(w & 0xF0)`, and each extension appends two bits
/// of `pi(w & 0xFC)`, `pi(w)` and `pi(w ^ 0x80)` in turn.
#[derive(Clone, Copy, Debug, Default)]
pub struct ChainAdversary;

impl ChainAdversary {
    pub const N: u32 = 8;

    pub fn programs() -> Vec<Program> {
        let n = Self::N;
        let pi = OracleName::Perm(n as u8);
        let masked = |b: &mut crate::circuit::CircuitBuilder, keep: u64, flip: u64| -> Vec<crate::circuit::Wire> {
            (0..n)
                .map(|i| {
                    let w = if keep >> i & 1 == 1 { b.input(i) } else { b.constant(false) };
                    if flip >> i & 1 == 1 {
                        b.not(w)
                    } else {
                        w
                    }
                })
                .collect()
        };
        let c2 = Program::gates(n, |b| {
            let x = masked(b, 0xF0, 0);
            b.oracle(pi, &x)[..2].to_vec()
        })
        .expect("chain c2");
        let mut out = vec![c2];
        for (keep, flip) in [(0xFCu64, 0u64), (0xFF, 0), (0xFF, 0x80)] {
            let prev = out.last().expect("nonempty").clone();
            let next = Program::extend_gates(&prev, |b, _| {
                let x = masked(b, keep, flip);
                b.oracle(pi, &x)[..2].to_vec()
            })
            .expect("chain extension");
            out.push(next);
        }
        out
    }
}

impl Adversary for ChainAdversary {
    fn name(&self) -> String {
        "chain".into()
    }

    fn n(&self) -> u32 {
        Self::N
    }

    fn run(&self, y: u64, env: &mut dyn SamAccess) -> Step<Option<u64>> {
        let ps = Self::programs();
        let mut w = env.sam(SamQuery::root(ps[0].clone()))?;
        for pair in ps.windows(2) {
            w = env.sam(SamQuery::child(w, pair[0].clone(), pair[1].clone()))?;
        }
        let got = env.oracle(OracleName::Perm(Self::N as u8), w)?;
        Ok((got == y).then_some(w))
    }
}

/// Adversary whose only Sam query names a program that queries `pi_n` at a
/// fixed point on every input.
#[derive(Clone, Copy, Debug)]
pub struct HardwiredQuery {
    pub n: u32,
    pub point: u64,
}

impl Adversary for HardwiredQuery {
    fn name(&self) -> String {
        format!("hardwired({:#x})", self.point)
    }

    fn n(&self) -> u32 {
        self.n
    }

    fn run(&self, _y: u64, env: &mut dyn SamAccess) -> Step<Option<u64>> {
        let (n, point) = (self.n, self.point);
        let c = Program::gates(n, |b| {
            let x = b.constant_word(point, n);
            b.oracle(OracleName::Perm(n as u8), &x)
        })?;
        env.sam(SamQuery::root(c))?;
        Ok(None)
    }
}

/// First hitting Sam position of an adversary run against `world`, or `None`.
pub fn first_hit(trace: &[TraceEntry], world: &mut World, n: u32, y: u64) -> Result<Option<usize>> {
    Ok(hit_events(trace, &mut world.adversary(), n, y)?.first().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{toy_commit, MsgCtx, PartySpec, Step as PStep};
    use crate::seed::master_seed;
    use crate::stats;
    use crate::HashFamily;
    use std::sync::Arc;

    fn sam_for(s: u64) -> SamOracle {
        SamOracle::new(HashFamily::new(master_seed(s)))
    }

    fn one_round_scheme() -> CommitmentScheme {
        // receiver sends nothing useful; sender replies with parity of its coins
        CommitmentScheme::new(Protocol {
            name: "one_round".into(),
            a: PartySpec {
                name: "s".into(),
                input_len: 1,
                coin_len: 6,
                query_bound: 0,
                next: Arc::new(|c: &MsgCtx, _: &mut dyn crate::OracleAccess| {
                    Ok(((c.coins.count_ones() as u64) ^ c.input) & 1)
                }),
            },
            b: PartySpec {
                name: "r".into(),
                input_len: 0,
                coin_len: 4,
                query_bound: 0,
                next: Arc::new(|c: &MsgCtx, _: &mut dyn crate::OracleAccess| Ok(c.coins)),
            },
            schedule: vec![PStep { from: Side::B, len: 4 }, PStep { from: Side::A, len: 1 }],
        })
    }

    #[test]
    fn a_tilde_minimal_case() {
        let s = one_round_scheme();
        let mut w = World::new(master_seed(1));
        let mut sam = sam_for(2);
        let mut sess = ReceiverSession::new(&s.protocol, 5);
        let run = a_tilde(&s.protocol, &mut sess, &mut w, &mut sam, 1).unwrap();
        let st = sam.stats();
        assert_eq!(st.sam_calls, 2);
        assert_eq!(st.depth, 2);
        assert!(st.normal_form, "{:?}", st.violations);
        let d = opening(&s, run.samples[0]);
        assert!(s.protocol.replay(Side::A, d.value, d.coins, &run.transcript, &mut w.adversary()).unwrap());
    }

    #[test]
    fn a_tilde_samples_consistent_toy_commit() {
        let s = toy_commit(12, 3).unwrap();
        for t in 0..30 {
            let mut w = World::new(master_seed(t));
            let mut sam = sam_for(1000 + t);
            let rc = seed::rng(&master_seed(t + 77)).gen::<u64>() & mask(36);
            let mut sess = ReceiverSession::new(&s.protocol, rc);
            let run = a_tilde(&s.protocol, &mut sess, &mut w, &mut sam, 8).unwrap();
            for &x in &run.samples {
                let d = opening(&s, x);
                assert!(s.verify(&run.transcript, &d, &mut w.adversary()).unwrap().is_some());
            }
            let st = sam.stats();
            assert_eq!(st.sam_calls, 3 + 8);
            assert_eq!(st.depth, 4);
            assert!(st.normal_form);
        }
    }

    #[test]
    fn inv_identity_and_constant() {
        let mut w = World::new(master_seed(3));
        let mut sam = sam_for(4);
        let p = InvParams::new(4, 2, 0.01).unwrap();
        let out = inv(&Program::identity(8), 0x5a, &p, &mut LiveEnv::new(&mut w, &mut sam)).unwrap();
        assert_eq!(out.preimages, Some(vec![0x5a; 4]));
        assert!(sam.stats().depth <= 3);
        assert!(sam.stats().normal_form);

        // constant f: every output uniform over the domain
        let f = Program::constant(8, 3, 5);
        let mut counts = vec![0u64; 256];
        for s in 0..400 {
            let mut sam = sam_for(10_000 + s);
            let out = inv(&f, 5, &InvParams::new(32, 3, 0.5).unwrap(), &mut LiveEnv::new(&mut w, &mut sam)).unwrap();
            for x in out.preimages.unwrap() {
                counts[x as usize] += 1;
            }
        }
        let (_, pv) = stats::chi_square_uniform(&counts);
        assert!(pv > 0.001, "p = {pv}");
    }

    #[test]
    fn inv_drop_half_finds_preimages() {
        let f = Program::truncate(12, 6);
        let p = InvParams::new(3, 3, 0.1).unwrap();
        assert_eq!(p.budget(6), 120);
        let mut w = World::new(master_seed(5));
        let mut r = seed::rng(&master_seed(6));
        for s in 0..100 {
            let x: u64 = r.gen::<u64>() & mask(12);
            let y = x & 63;
            let mut sam = sam_for(20_000 + s);
            let out = inv(&f, y, &p, &mut LiveEnv::new(&mut w, &mut sam)).unwrap();
            let st = sam.stats();
            assert!(st.depth <= 4);
            assert!(st.normal_form);
            assert_eq!(st.sam_calls, out.loop_calls + out.output_calls);
            if let Some(xs) = out.preimages {
                assert!(xs.iter().all(|x| x & 63 == y));
            }
        }
    }

    #[test]
    fn inv_budget_exhaustion_returns_none() {
        // eps = 1 with a single 10-bit block: budget 1024, success needs a
        // specific answer, so some runs abort
        let f = Program::identity(10);
        let p = InvParams::new(1, 1, 1.0).unwrap();
        let mut w = World::new(master_seed(7));
        let mut aborted = 0;
        for s in 0..60 {
            let mut sam = sam_for(30_000 + s);
            let out = inv(&f, 3, &p, &mut LiveEnv::new(&mut w, &mut sam)).unwrap();
            if out.preimages.is_none() {
                aborted += 1;
                assert_eq!(out.loop_calls, 1025);
            }
        }
        assert!(aborted > 5 && aborted < 45, "{aborted}");
    }

    #[test]
    fn comm_inv_silent_sender_and_toy() {
        // no sender messages at all
        let silent = Protocol {
            name: "silent".into(),
            a: PartySpec {
                name: "s".into(),
                input_len: 1,
                coin_len: 5,
                query_bound: 0,
                next: Arc::new(|_: &MsgCtx, _: &mut dyn crate::OracleAccess| Ok(0)),
            },
            b: PartySpec {
                name: "r".into(),
                input_len: 0,
                coin_len: 3,
                query_bound: 0,
                next: Arc::new(|c: &MsgCtx, _: &mut dyn crate::OracleAccess| Ok(c.coins)),
            },
            schedule: vec![PStep { from: Side::B, len: 3 }],
        };
        let mut w = World::new(master_seed(8));
        let mut sam = sam_for(9);
        let p = InvParams::new(5, 2, 0.5).unwrap();
        let out = comm_inv(&silent, &[6], &p, &mut LiveEnv::new(&mut w, &mut sam)).unwrap();
        assert_eq!(out.preimages.unwrap().len(), 5);
        assert_eq!(out.loop_calls, 0);

        let s = toy_commit(12, 5).unwrap();
        let t = s.commit(&mut w.adversary(), 0, 0x3a5, 0x0123_4567_89ab_cdef).unwrap();
        let p = InvParams::new(12, 3, 0.1).unwrap();
        let out = comm_inv(&s.protocol, &t, &p, &mut LiveEnv::new(&mut w, &mut sam)).unwrap();
        for x in out.preimages.unwrap() {
            let d = opening(&s, x);
            assert!(s.protocol.replay(Side::A, d.value, d.coins, &t, &mut w.adversary()).unwrap());
        }
    }

    #[test]
    fn s_tilde_round_on_blind_and_revealing_schemes() {
        let blind = one_round_scheme();
        let r = crate::protocol::binding_break_rate(&blind, &STildeRound { k: 12 }, 100, &master_seed(11)).unwrap();
        assert!(r.rate >= 0.95, "{}", r.rate);
        assert_eq!(r.normal_form_failures, 0);

        let mut reveal = one_round_scheme();
        reveal.protocol.a.next = Arc::new(|c: &MsgCtx, _: &mut dyn crate::OracleAccess| Ok(c.input));
        let r = crate::protocol::binding_break_rate(&reveal, &STildeRound { k: 12 }, 100, &master_seed(12)).unwrap();
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn hit_monitor_forced_and_empty() {
        let n = 8;
        let mut w = fixed_world(master_seed(13), n).unwrap();
        let x = 77;
        let y = w.perm(n).unwrap().eval(x).unwrap();
        let mut sam = sam_for(14);
        let out = hit_monitor(&HardwiredQuery { n, point: x }, y, &mut w, &mut sam).unwrap();
        assert_eq!(out.found, Some(x));
        assert_eq!(out.found_at, Some(0));

        struct Idle;
        impl Adversary for Idle {
            fn name(&self) -> String {
                "idle".into()
            }
            fn n(&self) -> u32 {
                8
            }
            fn run(&self, _: u64, _: &mut dyn SamAccess) -> Step<Option<u64>> {
                Ok(None)
            }
        }
        let mut sam = sam_for(15);
        assert_eq!(hit_monitor(&Idle, y, &mut w, &mut sam).unwrap().found, None);
    }

    #[test]
    fn perm_inverter_hits_in_final_block() {
        let (n, d) = (9, 3);
        let adv = SamPermInverter { n, d, eps: 0.05 };
        let mut early = 0;
        for s in 0..20 {
            let mut w = fixed_world(master_seed(100 + s), n).unwrap();
            let y = s * 13 % 512;
            let mut sam = sam_for(200 + s);
            let x = crate::adversary::run_live(&adv, y, &mut w, &mut sam).unwrap();
            let Some(x) = x else { continue };
            assert_eq!(w.perm(n).unwrap().eval(x).unwrap(), y);
            let hitsv = hit_events(sam.trace(), &mut w.adversary(), n, y).unwrap();
            let st = sam.stats();
            // the accepted final-block query is hitting
            let last_loop = st.sam_calls as usize - 2;
            assert!(hitsv.contains(&last_loop), "{hitsv:?} {last_loop}");
            // queries before the final block rarely hit
            let final_block_start = (0..st.forest.len()).find(|&i| st.forest.depths[i] == d).unwrap();
            early += hitsv.iter().filter(|&&h| h < final_block_start).count();
            assert!(st.normal_form);
        }
        assert!(early <= 4, "{early}");
    }

    #[test]
    fn alpha_beta_singleton_chain_and_silent_programs() {
        // injective chain: past the root D_i is a singleton, so
        // alpha_{i+1} = beta_i exactly
        struct Injective;
        impl Adversary for Injective {
            fn name(&self) -> String {
                "injective".into()
            }
            fn n(&self) -> u32 {
                6
            }
            fn run(&self, _y: u64, env: &mut dyn SamAccess) -> Step<Option<u64>> {
                let c1 = Program::apply_perm(6);
                let c2 = Program::extend(&c1, &Program::apply_perm_twice(6))?;
                let c3 = Program::extend(&c2, &Program::identity(6))?;
                let w = env.sam(SamQuery::root(c1.clone()))?;
                let w = env.sam(SamQuery::child(w, c1, c2.clone()))?;
                env.sam(SamQuery::child(w, c2, c3))?;
                Ok(None)
            }
        }
        for s in 0..10 {
            let mut w = fixed_world(master_seed(300 + s), 6).unwrap();
            let mut sam = sam_for(400 + s);
            let tr = alpha_beta_trace(&Injective, s * 5, &mut w, &mut sam).unwrap();
            for i in 2..tr.steps.len() {
                assert_eq!(tr.steps[i].alpha, tr.steps[i - 1].beta);
            }
        }

        struct Blind;
        impl Adversary for Blind {
            fn name(&self) -> String {
                "blind".into()
            }
            fn n(&self) -> u32 {
                6
            }
            fn run(&self, _y: u64, env: &mut dyn SamAccess) -> Step<Option<u64>> {
                let c1 = Program::parity(6);
                let c2 = Program::extend(&c1, &Program::truncate(6, 2))?;
                let w = env.sam(SamQuery::root(c1.clone()))?;
                env.sam(SamQuery::child(w, c1, c2))?;
                Ok(None)
            }
        }
        let mut w = fixed_world(master_seed(1), 6).unwrap();
        let tr = alpha_beta_trace(&Blind, 9, &mut w, &mut sam_for(2)).unwrap();
        assert!(tr.steps.iter().all(|s| s.alpha == 0.0 && s.beta == 0.0));
    }

    #[test]
    fn chain_adversary_is_normal_form() {
        let mut w = fixed_world(master_seed(17), 8).unwrap();
        let mut sam = sam_for(18);
        let tr = alpha_beta_trace(&ChainAdversary, 3, &mut w, &mut sam).unwrap();
        assert_eq!(tr.steps.len(), 4);
        let st = sam.stats();
        assert!(st.normal_form, "{:?}", st.violations);
        assert_eq!(st.depth, 4);
    }
}
