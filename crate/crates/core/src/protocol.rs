//! Two-party oracle-aided protocols, strategy compilation and commitment
//! schemes with hiding and binding estimators.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{mask, OracleCall, Program};
use crate::error::{Error, Result};
use crate::oracle::{OracleAccess, OracleError, OracleName, World};
use crate::sam::{SamOracle, TraceStats};
use crate::seed::{self, Seed};
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub from: Side,
    pub len: u32,
}

/// What a party sees when computing its next message.
pub struct MsgCtx<'a> {
    pub input: u64,
    pub coins: u64,
    /// All messages so far, both directions, in schedule order.
    pub transcript: &'a [u64],
    /// Index of the message being produced in the schedule.
    pub step: usize,
    /// Index of the message among this party's own messages.
    pub own_index: usize,
    pub len: u32,
}

pub type NextFn = Arc<dyn Fn(&MsgCtx, &mut dyn OracleAccess) -> std::result::Result<u64, OracleError> + Send + Sync>;

#[derive(Clone)]
pub struct PartySpec {
    pub name: String,
    pub input_len: u32,
    pub coin_len: u32,
    /// Oracle calls allowed per message.
    pub query_bound: u32,
    pub next: NextFn,
}

impl fmt::Debug for PartySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartySpec({}, input {}, coins {})", self.name, self.input_len, self.coin_len)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct View {
    pub input: u64,
    pub coins: u64,
    pub transcript: Vec<u64>,
    pub oracle_calls: Vec<OracleCall>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Execution {
    pub transcript: Vec<u64>,
    pub view_a: View,
    pub view_b: View,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MessageJson {
    pub from: Side,
    pub len: u32,
    pub hex: String,
}

struct Recording<'a> {
    inner: &'a mut dyn OracleAccess,
    calls: &'a mut Vec<OracleCall>,
}

impl OracleAccess for Recording<'_> {
    fn query(&mut self, name: OracleName, x: u64) -> std::result::Result<u64, OracleError> {
        let y = self.inner.query(name, x)?;
        self.calls.push(OracleCall { oracle: name, input: x, output: y });
        Ok(y)
    }
}

struct Bounded<'a> {
    inner: &'a mut dyn OracleAccess,
    left: u32,
    bound: u32,
}

impl OracleAccess for Bounded<'_> {
    fn query(&mut self, name: OracleName, x: u64) -> std::result::Result<u64, OracleError> {
        if self.left == 0 {
            return Err(OracleError::BoundExceeded(self.bound));
        }
        self.left -= 1;
        self.inner.query(name, x)
    }
}

#[derive(Clone, Debug)]
pub struct Protocol {
    pub name: String,
    pub a: PartySpec,
    pub b: PartySpec,
    pub schedule: Vec<Step>,
}

impl Protocol {
    pub fn party(&self, side: Side) -> &PartySpec {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    /// Schedule positions of `side`'s messages.
    pub fn positions(&self, side: Side) -> Vec<usize> {
        self.schedule.iter().enumerate().filter(|(_, s)| s.from == side).map(|(i, _)| i).collect()
    }

    pub fn rounds(&self, side: Side) -> usize {
        self.positions(side).len()
    }

    pub fn comm_bits(&self, side: Side) -> u32 {
        self.schedule.iter().filter(|s| s.from == side).map(|s| s.len).sum()
    }

    /// Next message of `side` given the transcript so far.
    pub fn next_message(
        &self,
        side: Side,
        input: u64,
        coins: u64,
        transcript: &[u64],
        oracle: &mut dyn OracleAccess,
    ) -> Result<u64> {
        let step = transcript.len();
        let s = self
            .schedule
            .get(step)
            .ok_or_else(|| Error::Schedule(format!("no step {step} in {}", self.name)))?;
        if s.from != side {
            return Err(Error::Schedule(format!("step {step} belongs to {}", s.from)));
        }
        let own_index = self.schedule[..step].iter().filter(|x| x.from == side).count();
        let party = self.party(side);
        let ctx = MsgCtx { input, coins, transcript, step, own_index, len: s.len };
        let mut bounded = Bounded { inner: oracle, left: party.query_bound, bound: party.query_bound };
        let msg = (party.next)(&ctx, &mut bounded)?;
        if s.len < 64 && msg >> s.len != 0 {
            return Err(Error::Schedule(format!(
                "{} sent {msg:#x} at step {step}, wider than {} bits",
                party.name, s.len
            )));
        }
        Ok(msg)
    }

    fn check_party_args(&self, side: Side, input: u64, coins: u64) -> Result<()> {
        let p = self.party(side);
        if p.input_len < 64 && input >> p.input_len != 0 {
            return Err(Error::Param(format!("{} input wider than {} bits", p.name, p.input_len)));
        }
        if p.coin_len < 64 && coins >> p.coin_len != 0 {
            return Err(Error::Param(format!("{} coins wider than {} bits", p.name, p.coin_len)));
        }
        Ok(())
    }

    pub fn execute(
        &self,
        oracle: &mut dyn OracleAccess,
        (input_a, coins_a): (u64, u64),
        (input_b, coins_b): (u64, u64),
    ) -> Result<Execution> {
        self.check_party_args(Side::A, input_a, coins_a)?;
        self.check_party_args(Side::B, input_b, coins_b)?;
        let mut transcript = Vec::with_capacity(self.schedule.len());
        let (mut calls_a, mut calls_b) = (Vec::new(), Vec::new());
        for s in &self.schedule {
            let msg = match s.from {
                Side::A => {
                    let mut rec = Recording { inner: &mut *oracle, calls: &mut calls_a };
                    self.next_message(Side::A, input_a, coins_a, &transcript, &mut rec)?
                }
                Side::B => {
                    let mut rec = Recording { inner: &mut *oracle, calls: &mut calls_b };
                    self.next_message(Side::B, input_b, coins_b, &transcript, &mut rec)?
                }
            };
            transcript.push(msg);
        }
        Ok(Execution {
            view_a: View { input: input_a, coins: coins_a, transcript: transcript.clone(), oracle_calls: calls_a },
            view_b: View { input: input_b, coins: coins_b, transcript: transcript.clone(), oracle_calls: calls_b },
            transcript,
        })
    }

    /// Transcript only, without recording views.
    pub fn run_transcript(
        &self,
        oracle: &mut dyn OracleAccess,
        a: (u64, u64),
        b: (u64, u64),
    ) -> Result<Vec<u64>> {
        let mut t = Vec::with_capacity(self.schedule.len());
        for s in &self.schedule {
            let (i, c) = if s.from == Side::A { a } else { b };
            let msg = self.next_message(s.from, i, c, &t, oracle)?;
            t.push(msg);
        }
        Ok(t)
    }

    /// Whether `side` with `(input, coins)` would have produced its messages
    /// in `transcript`, taking the peer's messages as given.
    pub fn replay(
        &self,
        side: Side,
        input: u64,
        coins: u64,
        transcript: &[u64],
        oracle: &mut dyn OracleAccess,
    ) -> Result<bool> {
        if transcript.len() > self.schedule.len() {
            return Err(Error::Schedule("transcript longer than schedule".into()));
        }
        if self.check_party_args(side, input, coins).is_err() {
            return Ok(false);
        }
        for (i, s) in self.schedule.iter().enumerate().take(transcript.len()) {
            if s.from == side && self.next_message(side, input, coins, &transcript[..i], oracle)? != transcript[i] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Messages of `side` in a transcript, in order.
    pub fn messages_of(&self, side: Side, transcript: &[u64]) -> Vec<u64> {
        self.schedule.iter().zip(transcript).filter(|(s, _)| s.from == side).map(|(_, m)| *m).collect()
    }

    pub fn transcript_json(&self, transcript: &[u64]) -> Vec<MessageJson> {
        self.schedule
            .iter()
            .zip(transcript)
            .map(|(s, m)| MessageJson {
                from: s.from,
                len: s.len,
                hex: format!("{:0width$x}", m, width = (s.len as usize).div_ceil(4).max(1)),
            })
            .collect()
    }

    /// Program mapping `input | coins << input_len` to the first `i` messages
    /// of `side` (concatenated, first message in the low bits), with the
    /// peer's messages fixed to `peer`. Successive `i` are constructive
    /// extensions of each other.
    pub fn strategy_program(&self, side: Side, peer: &[u64], i: usize) -> Result<Program> {
        let own = self.positions(side);
        if i > own.len() {
            return Err(Error::Param(format!("{} has only {} messages, asked for {i}", side, own.len())));
        }
        let party = self.party(side);
        let m = party.input_len + party.coin_len;
        let width: u32 = own[..i].iter().map(|&p| self.schedule[p].len).sum();
        if width > 64 {
            return Err(Error::Param(format!("strategy output {width} bits > 64")));
        }
        let mut prog = Program::host(
            format!("strategy/{}/{}/0", self.name, side),
            m,
            0,
            0,
            Arc::new(|_, _: &mut dyn OracleAccess| Ok(0)),
        )?;
        for j in 1..=i {
            let pos = own[j - 1];
            let need = self.schedule[..pos].iter().filter(|s| s.from != side).count();
            if peer.len() < need {
                return Err(Error::Param(format!(
                    "message {j} of {side} needs {need} peer messages, got {}",
                    peer.len()
                )));
            }
            let used: Vec<u64> = peer[..need].to_vec();
            let tag: Vec<String> = self
                .schedule
                .iter()
                .filter(|s| s.from != side)
                .zip(&used)
                .map(|(s, v)| format!("{}:{:x}", s.len, v))
                .collect();
            let name = format!("strategy/{}/{}/{}/{}", self.name, side, j, tag.join(","));
            let proto = self.clone();
            let in_len = party.input_len;
            let tail = Program::host(
                name,
                m,
                self.schedule[pos].len,
                j as u32 * party.query_bound,
                Arc::new(move |x, o: &mut dyn OracleAccess| {
                    let input = x & mask(in_len);
                    let coins = x >> in_len;
                    let mut t = Vec::with_capacity(pos + 1);
                    let mut k = 0;
                    for st in 0..=pos {
                        if proto.schedule[st].from == side {
                            let msg = proto.next_message(side, input, coins, &t, o).map_err(|e| match e {
                                Error::Oracle(e) => e,
                                _ => OracleError::Unavailable(OracleName::Perm(0)),
                            })?;
                            t.push(msg);
                        } else {
                            t.push(used[k]);
                            k += 1;
                        }
                    }
                    Ok(t[pos])
                }),
            )?;
            prog = Program::extend(&prog, &tail)?;
        }
        Ok(prog)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decommitment {
    pub value: u64,
    pub coins: u64,
}

pub type VerifyFn =
    Arc<dyn Fn(&Protocol, &[u64], &Decommitment, &mut dyn OracleAccess) -> Result<Option<u64>> + Send + Sync>;

/// Commit stage is `protocol` with A the sender (input = committed value) and
/// B the receiver; reveal is non-interactive.
#[derive(Clone)]
pub struct CommitmentScheme {
    pub protocol: Protocol,
    pub verify: VerifyFn,
}

impl fmt::Debug for CommitmentScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CommitmentScheme({})", self.protocol.name)
    }
}

/// Accepts a decommitment iff replaying the sender on it reproduces every
/// sender message of the transcript.
pub fn replay_verify() -> VerifyFn {
    Arc::new(|p: &Protocol, t: &[u64], d: &Decommitment, o: &mut dyn OracleAccess| {
        if t.len() != p.schedule.len() {
            return Ok(None);
        }
        Ok(p.replay(Side::A, d.value, d.coins, t, o)?.then_some(d.value))
    })
}

impl CommitmentScheme {
    pub fn new(protocol: Protocol) -> Self {
        CommitmentScheme { protocol, verify: replay_verify() }
    }

    pub fn value_len(&self) -> u32 {
        self.protocol.a.input_len
    }

    pub fn verify(&self, transcript: &[u64], d: &Decommitment, oracle: &mut dyn OracleAccess) -> Result<Option<u64>> {
        (self.verify)(&self.protocol, transcript, d, oracle)
    }

    /// Honest commit; returns the transcript.
    pub fn commit(&self, oracle: &mut dyn OracleAccess, value: u64, sender_coins: u64, receiver_coins: u64) -> Result<Vec<u64>> {
        self.protocol.run_transcript(oracle, (value, sender_coins), (0, receiver_coins))
    }
}

fn random_bits<R: Rng>(r: &mut R, bits: u32) -> u64 {
    r.gen::<u64>() & mask(bits)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HidingEstimate {
    pub rho: f64,
    pub se: f64,
    pub exact: bool,
    pub receiver_samples: u64,
}

pub const EXACT_SPACE_BITS: u32 = 20;

/// Distance between the commit-stage transcripts for `v0` and `v1` against
/// the honest receiver. For each receiver coin value the conditional
/// transcript distributions are enumerated over all sender coins and their
/// total variation taken; the estimate averages this over receiver coins
/// (all of them when the joint coin space has at most 2^20 points, otherwise
/// `samples` random draws with standard error).
pub fn hiding_distance(
    scheme: &CommitmentScheme,
    world: &mut World,
    v0: u64,
    v1: u64,
    samples: u64,
    seed: &Seed,
) -> Result<HidingEstimate> {
    let p = &scheme.protocol;
    let (ra, rb) = (p.a.coin_len, p.b.coin_len);
    if ra > EXACT_SPACE_BITS {
        return Err(Error::Budget(format!("sender coin space 2^{ra} too large to enumerate")));
    }
    let conditional = |world: &mut World, r: u64| -> Result<f64> {
        let mut counts: HashMap<Vec<u64>, (u64, u64)> = HashMap::new();
        for x in 0..1u64 << ra {
            let t0 = p.run_transcript(&mut world.adversary(), (v0, x), (0, r))?;
            counts.entry(t0).or_default().0 += 1;
            let t1 = p.run_transcript(&mut world.adversary(), (v1, x), (0, r))?;
            counts.entry(t1).or_default().1 += 1;
        }
        let total = (1u64 << ra) as f64;
        Ok(counts.values().map(|(a, b)| (*a as f64 - *b as f64).abs()).sum::<f64>() / (2.0 * total))
    };
    if ra + rb <= EXACT_SPACE_BITS {
        let mut acc = 0.0;
        for r in 0..1u64 << rb {
            acc += conditional(world, r)?;
        }
        return Ok(HidingEstimate { rho: acc / (1u64 << rb) as f64, se: 0.0, exact: true, receiver_samples: 1 << rb });
    }
    let mut g = seed::rng(seed);
    let mut vals = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let r = random_bits(&mut g, rb);
        vals.push(conditional(world, r)?);
    }
    let (mean, se) = stats::mean_se(&vals);
    Ok(HidingEstimate { rho: mean, se, exact: false, receiver_samples: samples })
}

/// Plays a cheating sender against one honest receiver.
pub struct ReceiverSession<'p> {
    protocol: &'p Protocol,
    coins: u64,
    transcript: Vec<u64>,
}

impl<'p> ReceiverSession<'p> {
    pub fn new(protocol: &'p Protocol, coins: u64) -> Self {
        ReceiverSession { protocol, coins, transcript: Vec::new() }
    }

    pub fn protocol(&self) -> &Protocol {
        self.protocol
    }

    /// Lets the receiver speak while it is its turn; returns the new messages.
    pub fn pump(&mut self, oracle: &mut dyn OracleAccess) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        while let Some(s) = self.protocol.schedule.get(self.transcript.len()) {
            if s.from != Side::B {
                break;
            }
            let m = self.protocol.next_message(Side::B, 0, self.coins, &self.transcript, oracle)?;
            self.transcript.push(m);
            out.push(m);
        }
        Ok(out)
    }

    pub fn send(&mut self, msg: u64) -> Result<()> {
        let step = self.transcript.len();
        match self.protocol.schedule.get(step) {
            Some(s) if s.from == Side::A => {
                if s.len < 64 && msg >> s.len != 0 {
                    return Err(Error::Schedule(format!("sender message at step {step} wider than {} bits", s.len)));
                }
                self.transcript.push(msg);
                Ok(())
            }
            _ => Err(Error::Schedule(format!("sender may not speak at step {step}"))),
        }
    }

    pub fn receiver_messages(&self) -> Vec<u64> {
        self.protocol.messages_of(Side::B, &self.transcript)
    }

    pub fn transcript(&self) -> &[u64] {
        &self.transcript
    }

    pub fn done(&self) -> bool {
        self.transcript.len() == self.protocol.schedule.len()
    }
}

/// A cheating sender trying to produce two valid openings to distinct values.
pub trait BindingAttacker: Sync {
    fn name(&self) -> String;
    fn attack(
        &self,
        scheme: &CommitmentScheme,
        session: &mut ReceiverSession<'_>,
        world: &mut World,
        sam: &mut SamOracle,
        seed: &Seed,
    ) -> Result<Option<(Decommitment, Decommitment)>>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BindingReport {
    pub attacker: String,
    pub trials: u64,
    pub breaks: u64,
    pub rate: f64,
    pub se: f64,
    pub sam_calls: u64,
    /// Trials whose Sam trace broke the normal-form discipline.
    pub normal_form_failures: u64,
    pub max_depth: u32,
}

/// Fraction of trials where the attacker ends with two decommitments that
/// both verify against the transcript and open to different values.
pub fn binding_break_rate(
    scheme: &CommitmentScheme,
    attacker: &dyn BindingAttacker,
    trials: u64,
    master: &Seed,
) -> Result<BindingReport> {
    let runs: Vec<(bool, TraceStats)> = (0..trials)
        .into_par_iter()
        .map(|t| binding_trial(scheme, attacker, &seed::derive(master, "binding/trial", t)))
        .collect::<Result<_>>()?;
    let (mut breaks, mut sam_calls, mut nf, mut depth) = (0u64, 0u64, 0u64, 0u32);
    for (broke, stats) in runs {
        breaks += broke as u64;
        sam_calls += stats.sam_calls;
        nf += !stats.normal_form as u64;
        depth = depth.max(stats.depth);
    }
    let rate = breaks as f64 / trials.max(1) as f64;
    Ok(BindingReport {
        attacker: attacker.name(),
        trials,
        breaks,
        rate,
        se: (rate * (1.0 - rate) / trials.max(1) as f64).sqrt(),
        sam_calls,
        normal_form_failures: nf,
        max_depth: depth,
    })
}

/// One binding game; returns whether it broke and the attacker's Sam trace stats.
pub fn binding_trial(scheme: &CommitmentScheme, attacker: &dyn BindingAttacker, ts: &Seed) -> Result<(bool, TraceStats)> {
    let mut world = World::new(seed::prf(ts, "world", &[]));
    let mut sam = SamOracle::new(crate::HashFamily::new(seed::prf(ts, "sam", &[])));
    let rc = random_bits(&mut seed::rng(&seed::prf(ts, "receiver", &[])), scheme.protocol.b.coin_len);
    let mut session = ReceiverSession::new(&scheme.protocol, rc);
    let out = attacker.attack(scheme, &mut session, &mut world, &mut sam, &seed::prf(ts, "attacker", &[]))?;
    if !session.done() {
        return Ok((false, sam.stats()));
    }
    let broke = match out {
        Some((d0, d1)) => {
            let t = session.transcript().to_vec();
            let a = scheme.verify(&t, &d0, &mut world.adversary())?;
            let b = scheme.verify(&t, &d1, &mut world.adversary())?;
            matches!((a, b), (Some(x), Some(y)) if x != y)
        }
        None => false,
    };
    Ok((broke, sam.stats()))
}

/// Honest sender as an attacker: commits to 0 and offers the same opening twice.
pub struct HonestSender;

impl BindingAttacker for HonestSender {
    fn name(&self) -> String {
        "honest".into()
    }

    fn attack(
        &self,
        scheme: &CommitmentScheme,
        session: &mut ReceiverSession<'_>,
        world: &mut World,
        _sam: &mut SamOracle,
        seed: &Seed,
    ) -> Result<Option<(Decommitment, Decommitment)>> {
        let coins = random_bits(&mut seed::rng(seed), scheme.protocol.a.coin_len);
        play_honest(scheme, session, world, 0, coins)?;
        let d = Decommitment { value: 0, coins };
        Ok(Some((d, d)))
    }
}

/// Drives the session with the honest sender on `(value, coins)`.
pub fn play_honest(
    scheme: &CommitmentScheme,
    session: &mut ReceiverSession<'_>,
    world: &mut World,
    value: u64,
    coins: u64,
) -> Result<()> {
    let p = &scheme.protocol;
    loop {
        session.pump(&mut world.adversary())?;
        if session.done() {
            return Ok(());
        }
        let m = p.next_message(Side::A, value, coins, session.transcript(), &mut world.adversary())?;
        session.send(m)?;
    }
}

fn inner(a: u64, x: u64) -> u64 {
    ((a & x).count_ones() & 1) as u64
}

/// The fixed public mask vector of `toy_commit(n, d)`.
pub fn toy_mask_vector(n: u32, d: u32) -> u64 {
    let s = seed::prf(&[0u8; 32], "toy_commit/a0", &[n as u8, d as u8]);
    let v = seed::seed_u64(&s) & mask(n);
    if v == 0 {
        1
    } else {
        v
    }
}

/// Linear commitment: the sender holds `x` in `{0,1}^n`; in round `i` the
/// receiver sends a random `a_i` and the sender answers `<a_i, x>`. The last
/// answer also carries `c = b ^ <a0, x>` for a fixed public `a0`, so the
/// protocol has exactly `d` rounds. Opening is `(b, x)`.
pub fn toy_commit(n: u32, d: u32) -> Result<CommitmentScheme> {
    if d == 0 || d + 1 >= n {
        return Err(Error::Param(format!("toy_commit needs 1 <= d and d + 1 < n, got n={n}, d={d}")));
    }
    if n + 1 > crate::sam::MAX_SAM_BITS || n * d > 64 {
        return Err(Error::Param(format!("toy_commit(n={n}, d={d}) exceeds desk-scale caps")));
    }
    let a0 = toy_mask_vector(n, d);
    let dd = d as usize;
    let sender = PartySpec {
        name: "toy_sender".into(),
        input_len: 1,
        coin_len: n,
        query_bound: 0,
        next: Arc::new(move |ctx: &MsgCtx, _: &mut dyn OracleAccess| {
            let a = *ctx.transcript.last().expect("receiver speaks first");
            let mut m = inner(a, ctx.coins);
            if ctx.own_index + 1 == dd {
                m |= (ctx.input ^ inner(a0, ctx.coins)) << 1;
            }
            Ok(m)
        }),
    };
    let receiver = PartySpec {
        name: "toy_receiver".into(),
        input_len: 0,
        coin_len: n * d,
        query_bound: 0,
        next: Arc::new(move |ctx: &MsgCtx, _: &mut dyn OracleAccess| {
            Ok(ctx.coins >> (ctx.own_index as u32 * n) & mask(n))
        }),
    };
    let mut schedule = Vec::new();
    for i in 1..=d {
        schedule.push(Step { from: Side::B, len: n });
        schedule.push(Step { from: Side::A, len: if i == d { 2 } else { 1 } });
    }
    Ok(CommitmentScheme::new(Protocol { name: format!("toy_commit_{n}_{d}"), a: sender, b: receiver, schedule }))
}
