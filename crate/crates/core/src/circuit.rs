//! Oracle-aided programs: gate circuits and host functions with canonical
//! identity, constructive extension lineage and instrumented evaluation.
//!
//! Bit conventions: bit `j` of an integer is wire/bit `j`; the "first" `k`
//! bits of a value are its low `k` bits. An extension places its tail output
//! above the base output: `out = base | tail << len(base)`.
//!
//! Canonical bytes (version 1):
//!
//! ```text
//! 0x01 | kind tag (u8) | u32le m | u32le l | u32le t | body hash (32) | u8 has_lineage | [lineage id (32)]
//! ```
//!
//! The lineage id commits to the parent's own lineage, so the whole chain is
//! bound transitively. The program id is `SHA-256("samlab/program/v1" || bytes)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::oracle::{OracleAccess, OracleError, OracleName};

pub type Wire = u32;
type OResult<T> = std::result::Result<T, OracleError>;

pub const CANONICAL_VERSION: u8 = 1;
pub const MAX_WIDTH: u32 = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProgramId(#[serde(with = "hex_id")] pub [u8; 32]);

mod hex_id {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let s = String::deserialize(d)?;
        let v = hex::decode(s).map_err(serde::de::Error::custom)?;
        v.try_into().map_err(|_| serde::de::Error::custom("program id must be 32 bytes"))
    }
}

impl fmt::Debug for ProgramId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", &hex::encode(self.0)[..12])
    }
}

impl fmt::Display for ProgramId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", hex::encode(self.0))
    }
}

#[inline]
pub fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Const(bool),
    Not(Wire),
    And(Wire, Wire),
    Or(Wire, Wire),
    Xor(Wire, Wire),
    /// Queries `oracle` on the inputs packed low-bit-first; yields
    /// `oracle.output_len()` new wires.
    Oracle { oracle: OracleName, inputs: Vec<Wire> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    input_len: u32,
    wire_count: u32,
    gates: Vec<Gate>,
    outputs: Vec<Wire>,
}

impl Circuit {
    pub fn input_len(&self) -> u32 {
        self.input_len
    }

    pub fn output_len(&self) -> u32 {
        self.outputs.len() as u32
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[Wire] {
        &self.outputs
    }

    pub fn oracle_gate_count(&self) -> u32 {
        self.gates.iter().filter(|g| matches!(g, Gate::Oracle { .. })).count() as u32
    }

    fn encode(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(16 + self.gates.len() * 9 + self.outputs.len() * 4);
        b.extend(self.input_len.to_le_bytes());
        b.extend((self.gates.len() as u32).to_le_bytes());
        for g in &self.gates {
            match g {
                Gate::Const(v) => b.extend([0, *v as u8]),
                Gate::Not(a) => {
                    b.push(1);
                    b.extend(a.to_le_bytes());
                }
                Gate::And(x, y) | Gate::Or(x, y) | Gate::Xor(x, y) => {
                    b.push(match g {
                        Gate::And(..) => 2,
                        Gate::Or(..) => 3,
                        _ => 4,
                    });
                    b.extend(x.to_le_bytes());
                    b.extend(y.to_le_bytes());
                }
                Gate::Oracle { oracle, inputs } => {
                    b.extend([5, oracle.tag(), oracle.n() as u8]);
                    b.extend((inputs.len() as u32).to_le_bytes());
                    for w in inputs {
                        b.extend(w.to_le_bytes());
                    }
                }
            }
        }
        b.extend((self.outputs.len() as u32).to_le_bytes());
        for w in &self.outputs {
            b.extend(w.to_le_bytes());
        }
        b
    }

    fn run(&self, x: u64, oracle: &mut dyn OracleAccess) -> OResult<u64> {
        let mut wires: Vec<bool> = Vec::with_capacity(self.wire_count as usize);
        for i in 0..self.input_len {
            wires.push(x >> i & 1 == 1);
        }
        for g in &self.gates {
            match g {
                Gate::Const(v) => wires.push(*v),
                Gate::Not(a) => wires.push(!wires[*a as usize]),
                Gate::And(a, b) => wires.push(wires[*a as usize] & wires[*b as usize]),
                Gate::Or(a, b) => wires.push(wires[*a as usize] | wires[*b as usize]),
                Gate::Xor(a, b) => wires.push(wires[*a as usize] ^ wires[*b as usize]),
                Gate::Oracle { oracle: name, inputs } => {
                    let q = inputs
                        .iter()
                        .enumerate()
                        .fold(0u64, |acc, (j, w)| acc | (wires[*w as usize] as u64) << j);
                    let a = oracle.query(*name, q)?;
                    for j in 0..name.output_len() {
                        wires.push(a >> j & 1 == 1);
                    }
                }
            }
        }
        Ok(self
            .outputs
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, w)| acc | (wires[*w as usize] as u64) << j))
    }
}

/// Incremental circuit construction. Wires `0..m` are the inputs.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    input_len: u32,
    wire_count: u32,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new(input_len: u32) -> Self {
        CircuitBuilder { input_len, wire_count: input_len, gates: Vec::new() }
    }

    pub fn input_len(&self) -> u32 {
        self.input_len
    }

    pub fn input(&self, i: u32) -> Wire {
        assert!(i < self.input_len, "input {i} out of range");
        i
    }

    pub fn inputs(&self) -> Vec<Wire> {
        (0..self.input_len).collect()
    }

    fn check(&self, w: Wire) {
        assert!(w < self.wire_count, "wire {w} not yet defined");
    }

    fn push(&mut self, g: Gate) -> Wire {
        self.gates.push(g);
        self.wire_count += 1;
        self.wire_count - 1
    }

    pub fn constant(&mut self, v: bool) -> Wire {
        self.push(Gate::Const(v))
    }

    pub fn not(&mut self, a: Wire) -> Wire {
        self.check(a);
        self.push(Gate::Not(a))
    }

    pub fn and(&mut self, a: Wire, b: Wire) -> Wire {
        self.check(a);
        self.check(b);
        self.push(Gate::And(a, b))
    }

    pub fn or(&mut self, a: Wire, b: Wire) -> Wire {
        self.check(a);
        self.check(b);
        self.push(Gate::Or(a, b))
    }

    pub fn xor(&mut self, a: Wire, b: Wire) -> Wire {
        self.check(a);
        self.check(b);
        self.push(Gate::Xor(a, b))
    }

    pub fn oracle(&mut self, oracle: OracleName, inputs: &[Wire]) -> Vec<Wire> {
        assert_eq!(inputs.len() as u32, oracle.input_len(), "oracle {oracle} arity");
        for &w in inputs {
            self.check(w);
        }
        let first = self.wire_count;
        self.gates.push(Gate::Oracle { oracle, inputs: inputs.to_vec() });
        self.wire_count += oracle.output_len();
        (first..self.wire_count).collect()
    }

    /// Wires holding a constant `bits`-wide value.
    pub fn constant_word(&mut self, value: u64, bits: u32) -> Vec<Wire> {
        (0..bits).map(|j| self.constant(value >> j & 1 == 1)).collect()
    }

    pub fn xor_word(&mut self, a: &[Wire], b: &[Wire]) -> Vec<Wire> {
        a.iter().zip(b).map(|(&x, &y)| self.xor(x, y)).collect()
    }

    pub fn finish(self, outputs: Vec<Wire>) -> Result<Circuit> {
        if outputs.len() as u32 > MAX_WIDTH {
            return Err(Error::Param(format!("output width {} > 64", outputs.len())));
        }
        for &w in &outputs {
            if w >= self.wire_count {
                return Err(Error::Param(format!("output wire {w} undefined")));
            }
        }
        Ok(Circuit { input_len: self.input_len, wire_count: self.wire_count, gates: self.gates, outputs })
    }
}

pub type HostFn = dyn Fn(u64, &mut dyn OracleAccess) -> OResult<u64> + Send + Sync;

#[derive(Clone)]
pub enum Body {
    Gates(Circuit),
    /// Host function identified by a stable name.
    Host { name: String, f: Arc<HostFn> },
    /// `base` followed by an independently evaluated `tail` on the same input.
    Concat { base: Program, tail: Program },
    /// First `len` output bits of `source`.
    Prefix { source: Program, len: u32 },
    /// Same function as `base`, padded with `pad` ineffective OR gates.
    Trivial { base: Program, pad: u32 },
}

impl fmt::Debug for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Body::Gates(c) => write!(f, "Gates({} gates)", c.gates.len()),
            Body::Host { name, .. } => write!(f, "Host({name})"),
            Body::Concat { base, tail } => write!(f, "Concat({:?}, {:?})", base.id(), tail.id()),
            Body::Prefix { source, len } => write!(f, "Prefix({:?}, {len})", source.id()),
            Body::Trivial { base, pad } => write!(f, "Trivial({:?}, {pad})", base.id()),
        }
    }
}

struct Inner {
    input_len: u32,
    output_len: u32,
    query_bound: u32,
    body: Body,
    lineage: Option<Program>,
    bytes: Vec<u8>,
    id: ProgramId,
}

/// An immutable, cheaply clonable oracle-aided program.
#[derive(Clone)]
pub struct Program(Arc<Inner>);

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Program")
            .field("id", &self.0.id)
            .field("m", &self.0.input_len)
            .field("l", &self.0.output_len)
            .field("t", &self.0.query_bound)
            .field("body", &self.0.body)
            .finish()
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for Program {}

/// One oracle call observed during evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCall {
    pub oracle: OracleName,
    pub input: u64,
    pub output: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalTrace {
    pub calls: Vec<OracleCall>,
}

impl EvalTrace {
    pub fn len(&self) -> usize {
        self.calls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calls.is_empty()
    }
}

/// Wraps an oracle to count calls, enforce a bound and report each call.
struct Metered<'a, F: FnMut(&OracleCall)> {
    inner: &'a mut dyn OracleAccess,
    bound: u32,
    used: u32,
    observe: F,
}

impl<F: FnMut(&OracleCall)> OracleAccess for Metered<'_, F> {
    fn query(&mut self, name: OracleName, x: u64) -> OResult<u64> {
        if self.used >= self.bound {
            return Err(OracleError::BoundExceeded(self.bound));
        }
        self.used += 1;
        let y = self.inner.query(name, x)?;
        (self.observe)(&OracleCall { oracle: name, input: x, output: y });
        Ok(y)
    }
}

fn kind_tag(body: &Body) -> u8 {
    match body {
        Body::Gates(_) => 1,
        Body::Host { .. } => 2,
        Body::Concat { .. } => 3,
        Body::Prefix { .. } => 4,
        Body::Trivial { .. } => 5,
    }
}

fn body_hash(body: &Body) -> [u8; 32] {
    let mut h = Sha256::new();
    match body {
        Body::Gates(c) => h.update(c.encode()),
        Body::Host { name, .. } => {
            h.update((name.len() as u32).to_le_bytes());
            h.update(name.as_bytes());
        }
        Body::Concat { base, tail } => {
            h.update(base.id().0);
            h.update(tail.id().0);
        }
        Body::Prefix { source, len } => {
            h.update(source.id().0);
            h.update(len.to_le_bytes());
        }
        Body::Trivial { base, pad } => {
            h.update(base.id().0);
            h.update(pad.to_le_bytes());
        }
    }
    h.finalize().into()
}

impl Program {
    fn build(input_len: u32, output_len: u32, query_bound: u32, body: Body, lineage: Option<Program>) -> Program {
        let mut bytes = Vec::with_capacity(16 + 32 + 33);
        bytes.push(CANONICAL_VERSION);
        bytes.push(kind_tag(&body));
        bytes.extend(input_len.to_le_bytes());
        bytes.extend(output_len.to_le_bytes());
        bytes.extend(query_bound.to_le_bytes());
        bytes.extend(body_hash(&body));
        match &lineage {
            Some(p) => {
                bytes.push(1);
                bytes.extend(p.id().0);
            }
            None => bytes.push(0),
        }
        let mut h = Sha256::new();
        h.update(b"samlab/program/v1");
        h.update(&bytes);
        let id = ProgramId(h.finalize().into());
        Program(Arc::new(Inner { input_len, output_len, query_bound, body, lineage, bytes, id }))
    }

    pub fn from_circuit(c: Circuit) -> Program {
        let (m, l, t) = (c.input_len, c.output_len(), c.oracle_gate_count());
        Program::build(m, l, t, Body::Gates(c), None)
    }

    /// Builds a gate program with a closure over a fresh builder.
    pub fn gates(m: u32, f: impl FnOnce(&mut CircuitBuilder) -> Vec<Wire>) -> Result<Program> {
        let mut b = CircuitBuilder::new(m);
        let out = f(&mut b);
        Ok(Program::from_circuit(b.finish(out)?))
    }

    /// Host-function program. `name` must identify the function uniquely;
    /// it is the only thing hashed into the program id.
    pub fn host(
        name: impl Into<String>,
        input_len: u32,
        output_len: u32,
        query_bound: u32,
        f: Arc<HostFn>,
    ) -> Result<Program> {
        if input_len > MAX_WIDTH || output_len > MAX_WIDTH {
            return Err(Error::Param("host program wider than 64 bits".into()));
        }
        Ok(Program::build(input_len, output_len, query_bound, Body::Host { name: name.into(), f }, None))
    }

    /// `base` followed by `tail`; both read the same input.
    pub fn extend(base: &Program, tail: &Program) -> Result<Program> {
        if base.input_len() != tail.input_len() {
            return Err(Error::InputLength { expected: base.input_len(), got: tail.input_len() });
        }
        let l = base.output_len() + tail.output_len();
        if l > MAX_WIDTH {
            return Err(Error::Param(format!("extension output width {l} > 64")));
        }
        let t = base.query_bound() + tail.query_bound();
        Ok(Program::build(
            base.input_len(),
            l,
            t,
            Body::Concat { base: base.clone(), tail: tail.clone() },
            Some(base.clone()),
        ))
    }

    /// Gate-level extension: `f` receives a builder holding all of `base`'s
    /// gates (so it may reuse intermediate wires) plus `base`'s output wires,
    /// and returns the tail's output wires.
    pub fn extend_gates(
        base: &Program,
        f: impl FnOnce(&mut CircuitBuilder, &[Wire]) -> Vec<Wire>,
    ) -> Result<Program> {
        let c = match &base.0.body {
            Body::Gates(c) => c,
            _ => return Err(Error::Unsupported("extend_gates needs a gate program".into())),
        };
        let mut b = CircuitBuilder {
            input_len: c.input_len,
            wire_count: c.wire_count,
            gates: c.gates.clone(),
        };
        let tail = f(&mut b, &c.outputs);
        let mut outs = c.outputs.clone();
        outs.extend(tail);
        let circuit = b.finish(outs)?;
        let (m, l, t) = (circuit.input_len, circuit.output_len(), circuit.oracle_gate_count());
        Ok(Program::build(m, l, t, Body::Gates(circuit), Some(base.clone())))
    }

    /// First `len` output bits of `source`, recorded as an extension of
    /// `lineage` when given (which must itself be a shorter prefix of `source`).
    pub fn prefix(source: &Program, len: u32, lineage: Option<&Program>) -> Result<Program> {
        if len > source.output_len() {
            return Err(Error::Param(format!("prefix {len} longer than output {}", source.output_len())));
        }
        if let Some(p) = lineage {
            let ok = match &p.0.body {
                Body::Prefix { source: s, len: pl } => s == source && *pl <= len,
                _ => false,
            };
            if !ok {
                return Err(Error::Param("prefix lineage must be a shorter prefix of the same source".into()));
            }
        }
        Ok(Program::build(
            source.input_len(),
            len,
            source.query_bound(),
            Body::Prefix { source: source.clone(), len },
            lineage.cloned(),
        ))
    }

    /// Chain of prefixes of `source` with the given increasing lengths, each an
    /// extension of the previous.
    pub fn prefix_chain(source: &Program, lens: &[u32]) -> Result<Vec<Program>> {
        let mut out: Vec<Program> = Vec::with_capacity(lens.len());
        for &l in lens {
            let p = Program::prefix(source, l, out.last())?;
            out.push(p);
        }
        Ok(out)
    }

    /// Trivial extension: same function, new identity.
    pub fn ext_trivial(&self, i: u32) -> Result<Program> {
        if i == 0 {
            return Err(Error::Param("trivial extension index starts at 1".into()));
        }
        Ok(Program::build(
            self.input_len(),
            self.output_len(),
            self.query_bound(),
            Body::Trivial { base: self.clone(), pad: i },
            Some(self.clone()),
        ))
    }

    pub fn input_len(&self) -> u32 {
        self.0.input_len
    }

    pub fn output_len(&self) -> u32 {
        self.0.output_len
    }

    pub fn query_bound(&self) -> u32 {
        self.0.query_bound
    }

    pub fn query_complexity(&self) -> u32 {
        self.0.query_bound
    }

    pub fn body(&self) -> &Body {
        &self.0.body
    }

    pub fn id(&self) -> ProgramId {
        self.0.id
    }

    pub fn canonical_bytes(&self) -> &[u8] {
        &self.0.bytes
    }

    pub fn lineage(&self) -> Option<&Program> {
        self.0.lineage.as_ref()
    }

    /// Ids along the lineage chain, nearest ancestor first (excluding self).
    pub fn lineage_ids(&self) -> Vec<ProgramId> {
        let mut out = Vec::new();
        let mut cur = self.lineage();
        while let Some(p) = cur {
            out.push(p.id());
            cur = p.lineage();
        }
        out
    }

    /// The program with all trivial-extension wrappers removed.
    pub fn core(&self) -> &Program {
        let mut p = self;
        while let Body::Trivial { base, .. } = &p.0.body {
            p = base;
        }
        p
    }

    /// Whether every sub-body is a gate circuit (evaluable against partial oracles).
    pub fn is_gate_program(&self) -> bool {
        match &self.0.body {
            Body::Gates(_) => true,
            Body::Host { .. } => false,
            Body::Concat { base, tail } => base.is_gate_program() && tail.is_gate_program(),
            Body::Prefix { source, .. } => source.is_gate_program(),
            Body::Trivial { base, .. } => base.is_gate_program(),
        }
    }

    fn check_input(&self, x: u64) -> OResult<()> {
        if self.input_len() < 64 && x >> self.input_len() != 0 {
            Err(OracleError::OutOfRange { value: x, bits: self.input_len() })
        } else {
            Ok(())
        }
    }

    fn run(&self, x: u64, oracle: &mut dyn OracleAccess) -> OResult<u64> {
        match &self.0.body {
            Body::Gates(c) => c.run(x, oracle),
            Body::Host { f, .. } => Ok(f(x, oracle)? & mask(self.output_len())),
            Body::Concat { base, tail } => {
                let b = base.run(x, oracle)?;
                let t = tail.run(x, oracle)?;
                Ok(b | t << base.output_len())
            }
            Body::Prefix { source, len } => Ok(source.run(x, oracle)? & mask(*len)),
            Body::Trivial { base, .. } => base.run(x, oracle),
        }
    }

    /// Evaluation with a per-call observer; enforces the query bound.
    pub fn eval_observed(
        &self,
        x: u64,
        oracle: &mut dyn OracleAccess,
        observe: impl FnMut(&OracleCall),
    ) -> OResult<u64> {
        self.check_input(x)?;
        let mut m = Metered { inner: oracle, bound: self.query_bound(), used: 0, observe };
        self.run(x, &mut m)
    }

    pub fn eval_plain(&self, x: u64, oracle: &mut dyn OracleAccess) -> OResult<u64> {
        self.eval_observed(x, oracle, |_| {})
    }

    pub fn eval(&self, x: u64, oracle: &mut dyn OracleAccess) -> OResult<(u64, EvalTrace)> {
        let mut trace = EvalTrace::default();
        let out = self.eval_observed(x, oracle, |c| trace.calls.push(*c))?;
        Ok((out, trace))
    }

    // A few standard programs.

    pub fn identity(m: u32) -> Program {
        Program::gates(m, |b| b.inputs()).expect("identity")
    }

    /// Output `pi_n(w)`.
    pub fn apply_perm(n: u32) -> Program {
        Program::gates(n, |b| {
            let ins = b.inputs();
            b.oracle(OracleName::Perm(n as u8), &ins)
        })
        .expect("apply_perm")
    }

    /// Output `pi_n(pi_n(w))`.
    pub fn apply_perm_twice(n: u32) -> Program {
        Program::gates(n, |b| {
            let ins = b.inputs();
            let y = b.oracle(OracleName::Perm(n as u8), &ins);
            b.oracle(OracleName::Perm(n as u8), &y)
        })
        .expect("apply_perm_twice")
    }

    pub fn constant(m: u32, l: u32, value: u64) -> Program {
        Program::gates(m, |b| b.constant_word(value, l)).expect("constant")
    }

    /// First `keep` input bits.
    pub fn truncate(m: u32, keep: u32) -> Program {
        Program::gates(m, |_| (0..keep.min(m)).collect()).expect("truncate")
    }

    /// XOR of all input bits.
    pub fn parity(m: u32) -> Program {
        Program::gates(m, |b| {
            let mut acc = b.constant(false);
            for i in 0..m {
                acc = b.xor(acc, i);
            }
            vec![acc]
        })
        .expect("parity")
    }

    /// Random gate program. When `perm` is set, a few `pi_perm` gates are mixed in
    /// (their inputs are drawn from existing wires).
    pub fn random<R: Rng>(m: u32, l: u32, gates: u32, perm: Option<u32>, rng: &mut R) -> Program {
        let mut b = CircuitBuilder::new(m);
        let mut pool: Vec<Wire> = b.inputs();
        if pool.is_empty() {
            pool.push(b.constant(false));
        }
        for g in 0..gates {
            let pick = |r: &mut R, p: &Vec<Wire>| p[r.gen_range(0..p.len())];
            let kind = rng.gen_range(0..10);
            match (kind, perm) {
                (0, Some(n)) if g % 3 == 0 && pool.len() >= n as usize => {
                    let ins: Vec<Wire> = (0..n).map(|_| pick(rng, &pool)).collect();
                    let outs = b.oracle(OracleName::Perm(n as u8), &ins);
                    pool.extend(outs);
                }
                (0..=2, _) => {
                    let (x, y) = (pick(rng, &pool), pick(rng, &pool));
                    pool.push(b.xor(x, y));
                }
                (3..=5, _) => {
                    let (x, y) = (pick(rng, &pool), pick(rng, &pool));
                    pool.push(b.and(x, y));
                }
                (6..=7, _) => {
                    let (x, y) = (pick(rng, &pool), pick(rng, &pool));
                    pool.push(b.or(x, y));
                }
                _ => {
                    let x = pick(rng, &pool);
                    pool.push(b.not(x));
                }
            }
        }
        let tail_start = pool.len().saturating_sub(2 * l as usize);
        let outs: Vec<Wire> = (0..l).map(|_| pool[rng.gen_range(tail_start..pool.len())]).collect();
        Program::from_circuit(b.finish(outs).expect("random circuit"))
    }
}

/// Lineage-based extension check. `b` extends `a` when `a`, or `a` with its
/// trivial-extension wrappers stripped, appears on `b`'s lineage chain
/// (including `b` itself).
pub fn is_extension(a: &Program, b: &Program) -> bool {
    let targets = [a.id(), a.core().id()];
    let mut cur = Some(b);
    while let Some(p) = cur {
        if targets.contains(&p.id()) {
            return true;
        }
        cur = p.lineage();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{NoOracle, World};
    use crate::seed::{master_seed, rng};
    use std::collections::HashSet;

    #[test]
    fn identity_and_apply_perm() {
        let id = Program::identity(7);
        let (out, tr) = id.eval(93, &mut NoOracle).unwrap();
        assert_eq!((out, tr.len()), (93, 0));

        let mut w = World::new(master_seed(1));
        let p = Program::apply_perm(6);
        let (out, tr) = p.eval(17, &mut w.adversary()).unwrap();
        let expect = w.perm(6).unwrap().eval(17).unwrap();
        assert_eq!(out, expect);
        assert_eq!(tr.calls, vec![OracleCall { oracle: OracleName::Perm(6), input: 17, output: expect }]);
        assert_eq!(Program::apply_perm_twice(6).query_complexity(), 2);
    }

    #[test]
    fn extension_prefix_law_exhaustive() {
        let mut w = World::new(master_seed(2));
        let a = Program::apply_perm(6);
        let par = Program::parity(6);
        let ext = Program::extend(&a, &par).unwrap();
        let ext2 = Program::extend_gates(&Program::identity(6), |b, outs| {
            let mut acc = b.constant(false);
            for &o in outs {
                acc = b.xor(acc, o);
            }
            vec![acc]
        })
        .unwrap();
        for x in 0..64u64 {
            let base = a.eval_plain(x, &mut w.adversary()).unwrap();
            let full = ext.eval_plain(x, &mut w.adversary()).unwrap();
            assert_eq!(full & mask(6), base);
            assert_eq!(full >> 6, (x.count_ones() & 1) as u64);
            let e2 = ext2.eval_plain(x, &mut NoOracle).unwrap();
            assert_eq!(e2, x | ((x.count_ones() as u64 & 1) << 6));
        }
        assert!(is_extension(&a, &ext));
        assert!(is_extension(&Program::identity(6), &ext2));
    }

    #[test]
    fn lineage_is_transitive_and_reflexive() {
        let a1 = Program::truncate(8, 2);
        let a2 = Program::extend(&a1, &Program::parity(8)).unwrap();
        let a3 = Program::extend(&a2, &Program::truncate(8, 3)).unwrap();
        assert!(is_extension(&a1, &a3));
        assert!(is_extension(&a3, &a3));
        assert!(!is_extension(&a3, &a1));
        assert!(!is_extension(&Program::parity(8), &a3) || Program::parity(8) == a1);
        assert!(!is_extension(&Program::identity(8), &a3));
    }

    #[test]
    fn trivial_extension_same_function_new_id() {
        let mut w = World::new(master_seed(3));
        let c = Program::random(6, 3, 20, Some(6), &mut rng(&master_seed(4)));
        let e1 = c.ext_trivial(1).unwrap();
        let e2 = c.ext_trivial(2).unwrap();
        assert_ne!(e1.id(), e2.id());
        assert_ne!(e1.id(), c.id());
        for x in 0..64 {
            let v = c.eval_plain(x, &mut w.adversary()).unwrap();
            assert_eq!(e1.eval_plain(x, &mut w.adversary()).unwrap(), v);
            assert_eq!(e2.eval_plain(x, &mut w.adversary()).unwrap(), v);
        }
        assert!(is_extension(&c, &e1));
        assert!(is_extension(&e1, &e1.ext_trivial(3).unwrap()));
        assert_eq!(e1.core(), &c);
        assert!(c.ext_trivial(0).is_err());
    }

    #[test]
    fn trivially_extended_base_still_extended_by_lineage_successor() {
        let src = Program::apply_perm(8);
        let chain = Program::prefix_chain(&src, &[2, 4, 8]).unwrap();
        let star = chain[0].ext_trivial(5).unwrap();
        let next = chain[1].ext_trivial(1).unwrap();
        assert!(is_extension(&star, &next));
        assert!(is_extension(&chain[0], &chain[2]));
        assert!(!is_extension(&chain[2], &chain[0]));
    }

    #[test]
    fn prefix_chain_rejects_bad_lineage() {
        let src = Program::apply_perm(8);
        let p4 = Program::prefix(&src, 4, None).unwrap();
        assert!(Program::prefix(&src, 2, Some(&p4)).is_err());
        assert!(Program::prefix(&Program::identity(8), 6, Some(&p4)).is_err());
        assert!(Program::prefix(&src, 9, None).is_err());
    }

    #[test]
    fn host_bound_enforced() {
        let greedy = Program::host(
            "greedy",
            4,
            4,
            1,
            Arc::new(|x, o: &mut dyn OracleAccess| {
                let y = o.query(OracleName::Perm(4), x)?;
                o.query(OracleName::Perm(4), y)
            }),
        )
        .unwrap();
        let mut w = World::new(master_seed(5));
        assert_eq!(greedy.eval_plain(3, &mut w.adversary()), Err(OracleError::BoundExceeded(1)));
    }

    #[test]
    fn input_range_checked() {
        assert!(matches!(Program::identity(4).eval(16, &mut NoOracle), Err(OracleError::OutOfRange { .. })));
    }

    #[test]
    fn extend_requires_matching_inputs() {
        assert!(Program::extend(&Program::identity(4), &Program::identity(5)).is_err());
    }

    #[test]
    fn canonical_ids_distinct_over_corpus() {
        let mut r = rng(&master_seed(6));
        let mut corpus = vec![
            Program::identity(4),
            Program::identity(5),
            Program::truncate(5, 4),
            Program::apply_perm(4),
            Program::apply_perm_twice(4),
            Program::constant(4, 2, 1),
            Program::constant(4, 2, 2),
            Program::parity(4),
        ];
        for _ in 0..200 {
            corpus.push(Program::random(6, 2, 12, Some(3), &mut r));
        }
        let base = corpus[0].clone();
        for i in 1..20 {
            corpus.push(base.ext_trivial(i).unwrap());
        }
        let bytes: HashSet<Vec<u8>> = corpus.iter().map(|p| p.canonical_bytes().to_vec()).collect();
        let ids: HashSet<ProgramId> = corpus.iter().map(|p| p.id()).collect();
        // random programs can coincide structurally; identical bytes must mean identical structure
        assert_eq!(bytes.len(), ids.len());
        assert!(ids.len() >= corpus.len() - 5);
    }

    #[test]
    fn purity() {
        let mut r = rng(&master_seed(7));
        let p = Program::random(8, 4, 30, Some(8), &mut r);
        let mut w1 = World::new(master_seed(8));
        let mut w2 = World::new(master_seed(8));
        for x in 0..256 {
            assert_eq!(p.eval(x, &mut w1.adversary()).unwrap(), p.eval(x, &mut w2.adversary()).unwrap());
        }
    }
}
