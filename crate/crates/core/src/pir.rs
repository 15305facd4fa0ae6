//! Commitments from single-server PIR: a Toeplitz-hash extractor, two mock
//! PIR protocols, the commit/reveal scheme, its hiding estimator and the
//! reduction from a binding breaker to an index predictor.
//!
//! Toeplitz seed layout: an `out_len x input_len` matrix `T` with
//! `T[r][c] = T[r-1][c-1]` is described by `input_len + out_len - 1` seed
//! bits. Seed bits `0..out_len` are the first column top to bottom
//! (`T[r][0]` is bit `r`); seed bits `out_len..` are the rest of the first
//! row left to right (`T[0][c]` is bit `out_len + c - 1`). Input bit `c` of
//! `x` is `(x >> c) & 1`; output bit `r` is the parity of row `r` and `x`.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::mask;
use crate::error::{Error, Result};
use crate::oracle::{NoOracle, OracleError};
use crate::protocol::{PartySpec, Protocol, Side, Step};
use crate::seed::{self, derive, prf, Seed};
use crate::stats;

pub const MAX_DB_BITS: u32 = 32;
/// Exact posterior enumeration runs the PIR `2^n` times.
pub const MAX_ENUM_BITS: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Toeplitz {
    pub input_len: u32,
    pub out_len: u32,
}

impl Toeplitz {
    pub fn new(input_len: u32, out_len: u32) -> Result<Self> {
        if input_len == 0 || out_len == 0 || input_len + out_len - 1 > 64 || input_len > 64 || out_len > 64 {
            return Err(Error::Param(format!("Toeplitz {out_len}x{input_len} needs a seed of at most 64 bits")));
        }
        Ok(Toeplitz { input_len, out_len })
    }

    pub fn seed_len(&self) -> u32 {
        self.input_len + self.out_len - 1
    }

    fn entry(&self, t: u64, r: u32, c: u32) -> bool {
        let bit = if r >= c { r - c } else { self.out_len + (c - r) - 1 };
        t >> bit & 1 == 1
    }

    /// Row `r` of the matrix as a mask over input bits.
    pub fn row(&self, t: u64, r: u32) -> u64 {
        (0..self.input_len).filter(|&c| self.entry(t, r, c)).fold(0, |m, c| m | 1 << c)
    }

    /// Column `c`, i.e. `ext(e_c, t)`.
    pub fn column(&self, t: u64, c: u32) -> u64 {
        (0..self.out_len).filter(|&r| self.entry(t, r, c)).fold(0, |m, r| m | 1 << r)
    }

    pub fn eval(&self, x: u64, t: u64) -> Result<u64> {
        if x > mask(self.input_len) {
            return Err(Error::InputLength { expected: self.input_len, got: 64 - x.leading_zeros() });
        }
        if t > mask(self.seed_len()) {
            return Err(Error::InputLength { expected: self.seed_len(), got: 64 - t.leading_zeros() });
        }
        Ok((0..self.out_len).fold(0, |acc, r| acc | ((self.row(t, r) & x).count_ones() as u64 & 1) << r))
    }
}

fn in_span(v: u64, vectors: impl IntoIterator<Item = u64>) -> bool {
    // xor basis keyed by leading bit
    let mut basis = [0u64; 64];
    for mut w in vectors {
        while w != 0 {
            let top = 63 - w.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = w;
                break;
            }
            w ^= basis[top];
        }
    }
    let mut v = v;
    while v != 0 {
        let top = 63 - v.leading_zeros() as usize;
        if basis[top] == 0 {
            return false;
        }
        v ^= basis[top];
    }
    true
}

pub type UserOutputFn = Arc<dyn Fn(u64, &[u64]) -> Option<u8> + Send + Sync>;
pub type RevealedFn = Arc<dyn Fn(u64, &[u64]) -> u64 + Send + Sync>;

/// A single-server PIR: side A is the server holding `x`, side B the user
/// holding the index `i` (0-based).
#[derive(Clone)]
pub struct PirSpec {
    pub name: String,
    pub n: u32,
    pub protocol: Protocol,
    pub server_comm_bits: u32,
    pub user_output: UserOutputFn,
    /// Mask of database positions the transcript determines; the posterior of
    /// `x` given the transcript is uniform on the rest.
    pub revealed: RevealedFn,
}

impl std::fmt::Debug for PirSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PirSpec({}, n = {})", self.name, self.n)
    }
}

fn index_bits(n: u32) -> u32 {
    (32 - (n - 1).leading_zeros()).max(1)
}

fn check_db(n: u32) -> Result<()> {
    if !(2..=MAX_DB_BITS).contains(&n) {
        return Err(Error::Param(format!("database length {n} outside 2..={MAX_DB_BITS}")));
    }
    Ok(())
}

/// User sends `i` in the clear, server answers `x_i`.
pub fn clear_index(n: u32) -> Result<PirSpec> {
    check_db(n)?;
    let ib = index_bits(n);
    let server = PartySpec {
        name: "server".into(),
        input_len: n,
        coin_len: 0,
        query_bound: 0,
        next: Arc::new(|c, _| Ok(c.input >> c.transcript[0] & 1)),
    };
    let user = PartySpec { name: "user".into(), input_len: ib, coin_len: 0, query_bound: 0, next: Arc::new(|c, _| Ok(c.input)) };
    Ok(PirSpec {
        name: "clear_index".into(),
        n,
        protocol: Protocol {
            name: format!("clear_index/{n}"),
            a: server,
            b: user,
            schedule: vec![Step { from: Side::B, len: ib }, Step { from: Side::A, len: 1 }],
        },
        server_comm_bits: 1,
        user_output: Arc::new(|_, t| t.get(1).map(|&b| b as u8)),
        revealed: Arc::new(|_, t| 1 << t[0]),
    })
}

/// Server sends the whole database.
pub fn full_download(n: u32) -> Result<PirSpec> {
    check_db(n)?;
    let server = PartySpec { name: "server".into(), input_len: n, coin_len: 0, query_bound: 0, next: Arc::new(|c, _| Ok(c.input)) };
    let user = PartySpec {
        name: "user".into(),
        input_len: index_bits(n),
        coin_len: 0,
        query_bound: 0,
        next: Arc::new(|_, _| Err(OracleError::BoundExceeded(0))),
    };
    Ok(PirSpec {
        name: "full_download".into(),
        n,
        protocol: Protocol { name: format!("full_download/{n}"), a: server, b: user, schedule: vec![Step { from: Side::A, len: n }] },
        server_comm_bits: n,
        user_output: Arc::new(|i, t| t.first().map(|&x| (x >> i & 1) as u8)),
        revealed: Arc::new(move |_, _| mask(n)),
    })
}

pub fn mock_pirs(n: u32) -> Result<Vec<PirSpec>> {
    Ok(vec![clear_index(n)?, full_download(n)?])
}

impl PirSpec {
    pub fn check_index(&self, i: u64) -> Result<()> {
        if i >= self.n as u64 {
            return Err(Error::Param(format!("index {i} outside [0, {})", self.n)));
        }
        Ok(())
    }

    /// Honest run; returns the transcript.
    pub fn run(&self, x: u64, i: u64) -> Result<Vec<u64>> {
        self.check_index(i)?;
        self.protocol.run_transcript(&mut NoOracle, (x, 0), (i, 0))
    }

    /// Server-to-user bits in a transcript.
    pub fn server_bits_sent(&self) -> u32 {
        self.protocol.comm_bits(Side::A)
    }

    pub fn output(&self, i: u64, transcript: &[u64]) -> Option<u8> {
        (self.user_output)(i, transcript)
    }

    /// `log2` of the number of databases consistent with the transcript when
    /// the user holds `i`; with a uniform `x` and a coin-free server this is
    /// the posterior min-entropy.
    pub fn posterior_min_entropy_exact(&self, i: u64, transcript: &[u64]) -> Result<f64> {
        if self.n > MAX_ENUM_BITS {
            return Err(Error::Budget(format!("posterior enumeration needs n <= {MAX_ENUM_BITS}")));
        }
        if self.protocol.a.coin_len != 0 {
            return Err(Error::Unsupported("posterior enumeration for servers with coins".into()));
        }
        let mut count = 0u64;
        for x in 0..1u64 << self.n {
            if self.run(x, i)? == transcript {
                count += 1;
            }
        }
        Ok((count as f64).log2())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComParams {
    pub n: u32,
    pub k: u32,
    pub d: u32,
}

impl ComParams {
    pub fn new(n: u32, k: u32, d: u32) -> Result<Self> {
        if d < 6 {
            return Err(Error::Param(format!("d = {d} gives an empty secret; need d >= 6")));
        }
        if k < 2 * d {
            return Err(Error::Param(format!("need k >= 2d, got k = {k}, d = {d}")));
        }
        if k >= n {
            return Err(Error::Param(format!("need k < n, got k = {k}, n = {n}")));
        }
        check_db(n)?;
        Ok(ComParams { n, k, d })
    }

    pub fn secret_len(&self) -> u32 {
        self.d / 6
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComCommitment {
    pub pir_transcript: Vec<u64>,
    pub t: u64,
    pub y: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComOpening {
    pub s: u64,
    pub x: u64,
}

/// What the receiver keeps from the commit stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComReceiver {
    pub index: u64,
    pub bit: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComRun {
    pub commitment: ComCommitment,
    pub opening: ComOpening,
    pub receiver: ComReceiver,
    pub sender_bits: u32,
}

#[derive(Clone, Debug)]
pub struct PirCom {
    pub pir: PirSpec,
    pub params: ComParams,
    pub ext: Toeplitz,
}

impl PirCom {
    pub fn new(pir: PirSpec, params: ComParams) -> Result<Self> {
        if pir.n != params.n {
            return Err(Error::Param(format!("PIR database {} bits, params n = {}", pir.n, params.n)));
        }
        let ext = Toeplitz::new(params.n, params.secret_len())?;
        Ok(PirCom { pir, params, ext })
    }

    /// Sender bits in the commit stage: PIR server bits, seed, masked secret.
    pub fn sender_bits(&self) -> u32 {
        self.pir.server_comm_bits + self.ext.seed_len() + self.ext.out_len
    }

    /// Whether the PIR server stays within `n - k` bits.
    pub fn within_comm_bound(&self) -> bool {
        self.pir.server_comm_bits <= self.params.n - self.params.k
    }

    /// Commit stage with sender coins `(x, t)` and receiver index drawn from `seed`.
    pub fn commit(&self, s: u64, seed: &Seed) -> Result<ComRun> {
        if s > mask(self.ext.out_len) {
            return Err(Error::Param(format!("secret {s:#x} wider than {} bits", self.ext.out_len)));
        }
        let n = self.params.n;
        let mut sender = seed::rng(&prf(seed, "com/sender", &[]));
        let x = sender.gen::<u64>() & mask(n);
        let t = sender.gen::<u64>() & mask(self.ext.seed_len());
        let i = seed::rng(&prf(seed, "com/receiver", &[])).gen_range(0..n as u64);
        let transcript = self.pir.run(x, i)?;
        let bit = self.pir.output(i, &transcript).ok_or_else(|| Error::Internal("PIR gave no output".into()))?;
        let sent = self.pir.server_bits_sent() + self.ext.seed_len() + self.ext.out_len;
        if sent != self.sender_bits() {
            return Err(Error::Internal(format!("sender sent {sent} bits, accounting says {}", self.sender_bits())));
        }
        let y = self.ext.eval(x, t)? ^ s;
        Ok(ComRun {
            commitment: ComCommitment { pir_transcript: transcript, t, y },
            opening: ComOpening { s, x },
            receiver: ComReceiver { index: i, bit },
            sender_bits: sent,
        })
    }

    /// `Some(s)` when `x_i` matches and `y = ext(x, t) ^ s`.
    pub fn verify(&self, r: &ComReceiver, c: &ComCommitment, o: &ComOpening) -> Option<u64> {
        if o.x > mask(self.params.n) || o.s > mask(self.ext.out_len) {
            return None;
        }
        if (o.x >> r.index & 1) as u8 != r.bit {
            return None;
        }
        (self.ext.eval(o.x, c.t).ok()? ^ o.s == c.y).then_some(o.s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PirHiding {
    pub pir: String,
    pub trials: u64,
    /// Mean over sampled `(trans, t)` of the exact view distance given them.
    pub rho: f64,
    pub se: f64,
    pub mean_min_entropy: f64,
    pub min_min_entropy: f64,
    /// Fraction of transcripts with posterior min-entropy below `k/6`.
    pub low_entropy_rate: f64,
    pub sender_bits: u32,
    pub within_comm_bound: bool,
}

/// Distance between commit views for secrets `s0` and `s1`.
///
/// Given the PIR transcript and `t`, `ext(X, t)` is uniform on a coset of the
/// span of the columns at unrevealed positions, so the two views are either
/// identical or disjoint; each trial contributes that 0/1 distance.
pub fn com_hiding_estimate(com: &PirCom, s0: u64, s1: u64, trials: u64, master: &Seed) -> Result<PirHiding> {
    let n = com.params.n;
    let rows: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|tr| {
            let run = com.commit(s0, &derive(master, "pir/hiding", tr))?;
            let open = !(com.pir.revealed)(run.receiver.index, &run.commitment.pir_transcript) & mask(n);
            let cols = (0..n).filter(|c| open >> c & 1 == 1).map(|c| com.ext.column(run.commitment.t, c));
            let tv = if in_span(s0 ^ s1, cols) { 0.0 } else { 1.0 };
            Ok((tv, open.count_ones() as f64))
        })
        .collect::<Result<_>>()?;
    let tv: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let h: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (rho, se) = stats::mean_se(&tv);
    let threshold = com.params.k as f64 / 6.0;
    Ok(PirHiding {
        pir: com.pir.name.clone(),
        trials,
        rho,
        se,
        mean_min_entropy: stats::mean_se(&h).0,
        min_min_entropy: h.iter().copied().fold(f64::INFINITY, f64::min),
        low_entropy_rate: h.iter().filter(|&&v| v < threshold).count() as f64 / trials.max(1) as f64,
        sender_bits: com.sender_bits(),
        within_comm_bound: com.within_comm_bound(),
    })
}

/// Exact posterior min-entropy of `x` after honest PIR runs on random `(x, i)`.
pub fn min_entropy_diagnostic(pir: &PirSpec, trials: u64, master: &Seed) -> Result<Vec<f64>> {
    (0..trials)
        .map(|tr| {
            let mut r = seed::rng(&derive(master, "pir/min-entropy", tr));
            let x = r.gen::<u64>() & mask(pir.n);
            let i = r.gen_range(0..pir.n as u64);
            pir.posterior_min_entropy_exact(i, &pir.run(x, i)?)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakerOutput {
    pub t: u64,
    pub y: u64,
    pub first: ComOpening,
    pub second: ComOpening,
}

/// A malicious sender: plays the PIR server, then emits `(t, y)` and two openings.
pub trait ComBreaker: Sync {
    fn name(&self) -> String;
    fn server_message(&self, com: &PirCom, transcript: &[u64], len: u32, coins: &Seed) -> u64;
    fn finish(&self, com: &PirCom, transcript: &[u64], coins: &Seed) -> Option<BreakerOutput>;
}

/// Against `clear_index`: reads `i`, answers honestly for a random `x`, then
/// opens to `x` and to `x` with one flipped bit away from `i`.
pub struct OmniscientClearIndex;

impl ComBreaker for OmniscientClearIndex {
    fn name(&self) -> String {
        "omniscient_clear_index".into()
    }

    fn server_message(&self, com: &PirCom, transcript: &[u64], _: u32, coins: &Seed) -> u64 {
        let x = seed::rng(&prf(coins, "x", &[])).gen::<u64>() & mask(com.params.n);
        x >> transcript[0] & 1
    }

    fn finish(&self, com: &PirCom, transcript: &[u64], coins: &Seed) -> Option<BreakerOutput> {
        let n = com.params.n;
        let x = seed::rng(&prf(coins, "x", &[])).gen::<u64>() & mask(n);
        let mut r = seed::rng(&prf(coins, "finish", &[]));
        let t = r.gen::<u64>() & mask(com.ext.seed_len());
        let i = transcript[0];
        let flips: Vec<u32> = (0..n).filter(|&c| c as u64 != i && com.ext.column(t, c) != 0).collect();
        if flips.is_empty() {
            return None;
        }
        let f = flips[r.gen_range(0..flips.len())];
        let s1 = r.gen::<u64>() & mask(com.ext.out_len);
        let x2 = x ^ 1 << f;
        let y = com.ext.eval(x, t).ok()? ^ s1;
        let s2 = com.ext.eval(x2, t).ok()? ^ y;
        Some(BreakerOutput { t, y, first: ComOpening { s: s1, x }, second: ComOpening { s: s2, x: x2 } })
    }
}

/// Answers honestly and opens the same way twice.
pub struct SameOpening;

impl ComBreaker for SameOpening {
    fn name(&self) -> String {
        "same_opening".into()
    }

    fn server_message(&self, com: &PirCom, transcript: &[u64], len: u32, coins: &Seed) -> u64 {
        let x = seed::rng(&prf(coins, "x", &[])).gen::<u64>() & mask(com.params.n);
        com.pir.protocol.next_message(Side::A, x, 0, transcript, &mut NoOracle).unwrap_or(0) & mask(len)
    }

    fn finish(&self, com: &PirCom, _: &[u64], coins: &Seed) -> Option<BreakerOutput> {
        let x = seed::rng(&prf(coins, "x", &[])).gen::<u64>() & mask(com.params.n);
        let t = seed::rng(&prf(coins, "t", &[])).gen::<u64>() & mask(com.ext.seed_len());
        let y = com.ext.eval(x, t).ok()?;
        let o = ComOpening { s: 0, x };
        Some(BreakerOutput { t, y, first: o, second: o })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub breaker: String,
    pub trials: u64,
    /// Both openings valid with different secrets.
    pub break_rate: f64,
    /// Trials where the malicious server fails (`x1 = x2` or no output).
    pub server_failure_rate: f64,
    /// `Pr[D'(v) = i]` with the predictor's coin averaged out.
    pub predict_rate: f64,
    pub predict_se: f64,
    /// Same with the coin sampled.
    pub predict_rate_sampled: f64,
    /// `Pr[D = 1 | user holds i] - Pr[D = 1 | user holds j]` for independent uniform `i, j`.
    pub advantage: f64,
    pub advantage_se: f64,
    pub advantage_sampled: f64,
}

struct ServerRun {
    /// Position `D'` excludes; `None` when the server fails.
    excluded: Option<u64>,
    valid_break: bool,
}

fn malicious_run(com: &PirCom, breaker: &dyn ComBreaker, user_index: u64, coins: &Seed) -> Result<ServerRun> {
    let proto = &com.pir.protocol;
    let mut transcript = Vec::with_capacity(proto.schedule.len());
    for s in &proto.schedule {
        let msg = match s.from {
            Side::B => proto.next_message(Side::B, user_index, 0, &transcript, &mut NoOracle)?,
            Side::A => breaker.server_message(com, &transcript, s.len, coins) & mask(s.len),
        };
        transcript.push(msg);
    }
    let bit = com.pir.output(user_index, &transcript);
    let Some(out) = breaker.finish(com, &transcript, coins) else {
        return Ok(ServerRun { excluded: None, valid_break: false });
    };
    let c = ComCommitment { pir_transcript: transcript, t: out.t, y: out.y };
    let valid_break = bit.is_some_and(|b| {
        let r = ComReceiver { index: user_index, bit: b };
        matches!((com.verify(&r, &c, &out.first), com.verify(&r, &c, &out.second)), (Some(a), Some(b)) if a != b)
    });
    let diff = out.first.x ^ out.second.x;
    let excluded = (diff != 0).then(|| diff.trailing_zeros() as u64);
    Ok(ServerRun { excluded, valid_break })
}

/// `Pr[D' = v]` when `D'` is uniform on `[n] \ {j}`.
fn predictor_prob(n: u64, excluded: Option<u64>, v: u64) -> f64 {
    match excluded {
        Some(j) if j != v => 1.0 / (n - 1) as f64,
        _ => 0.0,
    }
}

fn sample_predictor(n: u64, excluded: Option<u64>, r: &mut impl Rng) -> Option<u64> {
    let j = excluded?;
    let v = r.gen_range(0..n - 1);
    Some(if v >= j { v + 1 } else { v })
}

/// `Pr[D = 1]` for `D_{i,j}`: 1 on `i`, 0 on `j`, a fair coin otherwise.
fn distinguisher_prob(n: u64, excluded: Option<u64>, i: u64, j: u64) -> f64 {
    let pi = predictor_prob(n, excluded, i);
    let pj = if i == j { 0.0 } else { predictor_prob(n, excluded, j) };
    let none = if excluded.is_some() { 1.0 - pi - pj } else { 1.0 };
    pi + 0.5 * none
}

fn distinguisher_sample(n: u64, excluded: Option<u64>, i: u64, j: u64, r: &mut impl Rng) -> f64 {
    match sample_predictor(n, excluded, r) {
        Some(v) if v == i => 1.0,
        Some(v) if v == j => 0.0,
        _ => r.gen_range(0..2) as f64,
    }
}

pub fn binding_reduction(com: &PirCom, breaker: &dyn ComBreaker, trials: u64, master: &Seed) -> Result<ReductionReport> {
    let n = com.params.n as u64;
    let rows: Vec<[f64; 6]> = (0..trials)
        .into_par_iter()
        .map(|tr| {
            let ts = derive(master, "pir/reduction", tr);
            let mut r = seed::rng(&prf(&ts, "users", &[]));
            let (i, j) = (r.gen_range(0..n), r.gen_range(0..n));
            let run = malicious_run(com, breaker, i, &prf(&ts, "breaker/i", &[]))?;
            let run_j = malicious_run(com, breaker, j, &prf(&ts, "breaker/j", &[]))?;
            let mut coins = seed::rng(&prf(&ts, "predictor", &[]));
            let hit = (sample_predictor(n, run.excluded, &mut coins) == Some(i)) as u8 as f64;
            let adv = distinguisher_prob(n, run.excluded, i, j) - distinguisher_prob(n, run_j.excluded, i, j);
            let adv_sampled = distinguisher_sample(n, run.excluded, i, j, &mut coins)
                - distinguisher_sample(n, run_j.excluded, i, j, &mut coins);
            Ok([
                run.valid_break as u8 as f64,
                run.excluded.is_none() as u8 as f64,
                predictor_prob(n, run.excluded, i),
                hit,
                adv,
                adv_sampled,
            ])
        })
        .collect::<Result<_>>()?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    let (predict_rate, predict_se) = stats::mean_se(&col(2));
    let (advantage, advantage_se) = stats::mean_se(&col(4));
    Ok(ReductionReport {
        breaker: breaker.name(),
        trials,
        break_rate: stats::mean_se(&col(0)).0,
        server_failure_rate: stats::mean_se(&col(1)).0,
        predict_rate,
        predict_se,
        predict_rate_sampled: stats::mean_se(&col(3)).0,
        advantage,
        advantage_se,
        advantage_sampled: stats::mean_se(&col(5)).0,
    })
}
