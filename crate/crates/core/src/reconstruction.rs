//! Compression of a random permutation given an inverter that never hits:
//! the encoder producing `(Y, X, Z)` and the decoder rebuilding `pi_n`.
//!
//! Blob layout (all integers little-endian):
//!
//! ```text
//! magic "SAMAUX" | version u8 = 1 | n u8 | a u32 | payload
//! ```
//!
//! The payload is a bit string, bit `i` of the payload stored in bit `i % 8`
//! of byte `i / 8`. It holds, in order, the colex rank of `Y` in
//! `ceil(log2 C(2^n, a))` bits, the colex rank of `X` in the same width, and
//! the Lehmer rank of `Z` in `ceil(log2((2^n - a)!))` bits. Every rank is
//! written least significant bit first. `Z` lists `pi_n(x)` for the `x`
//! outside `X` in increasing order; its Lehmer digits index into the sorted
//! complement of `Y`.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::adversary::{run_live, Adversary, Interrupt, SamAccess, Step};
use crate::circuit::{mask, Program};
use crate::error::{Error, Result};
use crate::oracle::{OracleAccess, OracleError, OracleName, World};
use crate::prp::HashFamily;
use crate::sam::{hit_events, SamOracle, SamQuery, TraceEntry};

pub const AUX_MAGIC: &[u8; 6] = b"SAMAUX";
pub const AUX_VERSION: u8 = 1;
pub const MAX_SWEEP_BITS: u32 = 10;

fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `ceil(log2 x)` for `x >= 1`.
fn ceil_log2(x: &BigUint) -> u64 {
    if x.is_zero() {
        return 0;
    }
    (x - 1u32).bits()
}

/// Bit widths of the three payload sections for `a` special points.
pub fn section_bits(n: u32, a: u64) -> (u64, u64, u64) {
    let big = 1u64 << n;
    let c = ceil_log2(&binom(big, a));
    (c, c, ceil_log2(&factorial(big - a)))
}

/// `2 ceil(log2 C(2^n, a)) + ceil(log2((2^n - a)!))`.
pub fn size_bound_bits(n: u32, a: u64) -> u64 {
    let (y, x, z) = section_bits(n, a);
    y + x + z
}

/// `ceil(log2(2^n!))`, the cost of writing `pi_n` down directly.
pub fn full_bits(n: u32) -> u64 {
    ceil_log2(&factorial(1u64 << n))
}

fn colex_rank(sorted: &[u64]) -> BigUint {
    sorted.iter().enumerate().fold(BigUint::zero(), |acc, (i, &c)| acc + binom(c, i as u64 + 1))
}

fn colex_unrank(mut r: BigUint, a: usize, universe: u64) -> Vec<u64> {
    let mut out = vec![0u64; a];
    let mut hi = universe;
    for i in (0..a).rev() {
        // largest c < hi with C(c, i+1) <= r
        let mut c = hi - 1;
        loop {
            let b = binom(c, i as u64 + 1);
            if b <= r {
                r -= b;
                break;
            }
            c -= 1;
        }
        out[i] = c;
        hi = c;
    }
    out
}

fn lehmer_rank(seq: &[u64], sorted_universe: &[u64]) -> BigUint {
    let mut remaining: Vec<u64> = sorted_universe.to_vec();
    let m = seq.len();
    let mut r = BigUint::zero();
    for (i, v) in seq.iter().enumerate() {
        let pos = remaining.binary_search(v).expect("element of the universe");
        remaining.remove(pos);
        r = r * (m - i) as u64 + pos as u64;
    }
    r
}

fn lehmer_unrank(mut r: BigUint, sorted_universe: &[u64]) -> Vec<u64> {
    let m = sorted_universe.len();
    let mut digits = vec![0usize; m];
    for i in (0..m).rev() {
        let radix = BigUint::from((m - i) as u64);
        let d = &r % &radix;
        digits[i] = d.to_u64_digits().first().copied().unwrap_or(0) as usize;
        r /= radix;
    }
    let mut remaining = sorted_universe.to_vec();
    digits.into_iter().map(|d| remaining.remove(d)).collect()
}

struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    fn push(&mut self, v: &BigUint, width: u64) {
        for i in 0..width {
            if self.len.is_multiple_of(8) {
                self.bytes.push(0);
            }
            if v.bit(i) {
                *self.bytes.last_mut().expect("pushed") |= 1 << (self.len % 8);
            }
            self.len += 1;
        }
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl BitReader<'_> {
    fn read(&mut self, width: u64) -> Result<BigUint> {
        let mut v = BigUint::zero();
        for i in 0..width {
            let byte = self.bytes.get((self.pos / 8) as usize).ok_or_else(|| Error::Decode("aux payload truncated".into()))?;
            if byte >> (self.pos % 8) & 1 == 1 {
                v.set_bit(i, true);
            }
            self.pos += 1;
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aux {
    pub n: u32,
    /// Sorted.
    pub y: Vec<u64>,
    /// Sorted; `X = pi_n^{-1}(Y)`.
    pub x: Vec<u64>,
    /// `pi_n(x)` for `x` outside `X`, in increasing `x`.
    pub z: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSize {
    pub y_bits: u64,
    pub x_bits: u64,
    pub z_bits: u64,
    pub payload_bits: u64,
    pub blob_bytes: u64,
}

const HEADER_BYTES: usize = 6 + 1 + 1 + 4;

fn complement(n: u32, sorted: &[u64]) -> Vec<u64> {
    let s: BTreeSet<u64> = sorted.iter().copied().collect();
    (0..1u64 << n).filter(|v| !s.contains(v)).collect()
}

impl Aux {
    pub fn a(&self) -> u64 {
        self.y.len() as u64
    }

    pub fn size(&self) -> AuxSize {
        let (y, x, z) = section_bits(self.n, self.a());
        let payload = y + x + z;
        AuxSize { y_bits: y, x_bits: x, z_bits: z, payload_bits: payload, blob_bytes: HEADER_BYTES as u64 + payload.div_ceil(8) }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (yb, xb, zb) = section_bits(self.n, self.a());
        let mut w = BitWriter { bytes: Vec::new(), len: 0 };
        w.push(&colex_rank(&self.y), yb);
        w.push(&colex_rank(&self.x), xb);
        w.push(&lehmer_rank(&self.z, &complement(self.n, &self.y)), zb);
        let mut out = Vec::with_capacity(HEADER_BYTES + w.bytes.len());
        out.extend_from_slice(AUX_MAGIC);
        out.push(AUX_VERSION);
        out.push(self.n as u8);
        out.extend((self.y.len() as u32).to_le_bytes());
        out.extend(w.bytes);
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Aux> {
        if b.len() < HEADER_BYTES || &b[..6] != AUX_MAGIC {
            return Err(Error::Decode("not an aux blob".into()));
        }
        if b[6] != AUX_VERSION {
            return Err(Error::Decode(format!("aux version {} unsupported", b[6])));
        }
        let n = b[7] as u32;
        if n == 0 || n > MAX_SWEEP_BITS {
            return Err(Error::Decode(format!("aux n = {n} out of range")));
        }
        let a = u32::from_le_bytes(b[8..12].try_into().expect("4 bytes")) as u64;
        if a > 1 << n {
            return Err(Error::Decode("aux a larger than the domain".into()));
        }
        let (yb, xb, zb) = section_bits(n, a);
        let mut r = BitReader { bytes: &b[HEADER_BYTES..], pos: 0 };
        let (yr, xr, zr) = (r.read(yb)?, r.read(xb)?, r.read(zb)?);
        let y = colex_unrank(yr, a as usize, 1 << n);
        let x = colex_unrank(xr, a as usize, 1 << n);
        let z = lehmer_unrank(zr, &complement(n, &y));
        Ok(Aux { n, y, x, z })
    }

    /// Partial view holding `pi_n` on everything outside `X`.
    pub fn view(&self) -> PartialPermView {
        let mut v = PartialPermView::new(self.n);
        for (x, z) in complement(self.n, &self.x).into_iter().zip(&self.z) {
            v.set(x, *z).expect("fresh view");
        }
        v
    }
}

/// Known pairs of `pi_n`; lookups distinguish known from unknown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialPermView {
    n: u32,
    fwd: HashMap<u64, u64>,
    bwd: HashMap<u64, u64>,
}

impl PartialPermView {
    pub fn new(n: u32) -> Self {
        PartialPermView { n, fwd: HashMap::new(), bwd: HashMap::new() }
    }

    pub fn get(&self, x: u64) -> Option<u64> {
        self.fwd.get(&x).copied()
    }

    pub fn set(&mut self, x: u64, y: u64) -> Result<()> {
        if self.fwd.get(&x).is_some_and(|&v| v != y) || self.bwd.get(&y).is_some_and(|&v| v != x) {
            return Err(Error::Decode(format!("conflicting pair ({x}, {y})")));
        }
        self.fwd.insert(x, y);
        self.bwd.insert(y, x);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    /// Full table once every point is known.
    pub fn table(&self) -> Option<Vec<u64>> {
        (0..1u64 << self.n).map(|x| self.get(x)).collect()
    }
}

/// `I`: the targets the adversary inverts correctly without a hitting query.
pub fn find_invertible_set(adv: &dyn Adversary, world: &mut World, hash: &HashFamily) -> Result<BTreeSet<u64>> {
    let n = adv.n();
    if n > MAX_SWEEP_BITS {
        return Err(Error::Budget(format!("invertible-set sweep needs n <= {MAX_SWEEP_BITS}, got {n}")));
    }
    let mut out = BTreeSet::new();
    for y in 0..1u64 << n {
        let mut sam = SamOracle::new(hash.clone());
        let got = run_live(adv, y, world, &mut sam)?;
        let ok = match got {
            Some(x) => world.perm(n)?.eval(x)? == y,
            None => false,
        };
        if ok && hit_events(sam.trace(), &mut world.adversary(), n, y)?.is_empty() {
            out.insert(y);
        }
    }
    Ok(out)
}

/// `pi_n` outputs the adversary sees on target `y`: its direct calls and the
/// gates of `C(w)` and `C(w')` for each Sam call `w' = Sam(w, C, .)`.
pub fn touched_images(adv: &dyn Adversary, y: u64, world: &mut World, hash: &HashFamily) -> Result<Vec<u64>> {
    let n = adv.n();
    let pi = OracleName::Perm(n as u8);
    let mut sam = SamOracle::new(hash.clone());
    run_live(adv, y, world, &mut sam)?;
    let mut out = Vec::new();
    for e in sam.trace() {
        match e {
            TraceEntry::Direct { oracle, output, .. } if *oracle == pi => out.push(*output),
            TraceEntry::Direct { .. } => {}
            TraceEntry::Sam { query, answer } => {
                if let (Some(c), Some(w)) = (&query.c, query.w) {
                    for p in [w, *answer] {
                        c.eval_observed(p, &mut world.adversary(), |call| {
                            if call.oracle == pi {
                                out.push(call.output);
                            }
                        })?;
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeReport {
    pub aux: Aux,
    pub invertible: usize,
    /// Elements of `I` removed in each step, the chosen `y` included.
    pub removed_per_step: Vec<usize>,
}

/// Builds `(Y, X, Z)`: repeatedly move the smallest `y` of `I` into `Y` and
/// drop from `I` every image the adversary touches on `y`.
pub fn encode(adv: &dyn Adversary, world: &mut World, hash: &HashFamily) -> Result<EncodeReport> {
    let n = adv.n();
    let mut inv = find_invertible_set(adv, world, hash)?;
    let invertible = inv.len();
    let mut ys = Vec::new();
    let mut removed = Vec::new();
    while let Some(y) = inv.pop_first() {
        ys.push(y);
        let mut r = 1;
        for t in touched_images(adv, y, world, hash)? {
            r += inv.remove(&t) as usize;
        }
        removed.push(r);
    }
    let table = world.perm(n)?.table();
    let mut xs: Vec<u64> = ys.iter().map(|&y| table.iter().position(|&v| v == y).expect("bijection") as u64).collect();
    xs.sort_unstable();
    let z = complement(n, &xs).into_iter().map(|x| table[x as usize]).collect();
    Ok(EncodeReport { aux: Aux { n, y: ys, x: xs, z }, invertible, removed_per_step: removed })
}

struct PartialOracle<'a> {
    n: u32,
    view: &'a PartialPermView,
    context: &'a mut World,
}

impl OracleAccess for PartialOracle<'_> {
    fn query(&mut self, name: OracleName, x: u64) -> std::result::Result<u64, OracleError> {
        match name {
            OracleName::Perm(k) if k as u32 == self.n => {
                self.view.get(x).ok_or(OracleError::Unknown { oracle: name, input: x })
            }
            OracleName::PermInverse(_) => Err(OracleError::Denied(name)),
            _ => self.context.adversary().query(name, x),
        }
    }
}

/// The decoder's stand-in for the live oracles and Sam.
pub struct DecoderEnv<'a> {
    pub n: u32,
    pub view: &'a PartialPermView,
    pub context: &'a mut World,
    pub hash: &'a HashFamily,
}

impl DecoderEnv<'_> {
    fn partial(&mut self) -> PartialOracle<'_> {
        PartialOracle { n: self.n, view: self.view, context: self.context }
    }
}

fn classify(e: OracleError) -> Interrupt {
    match e {
        OracleError::Unknown { input, .. } => Interrupt::Halt(input),
        other => Interrupt::Fail(other.into()),
    }
}

impl SamAccess for DecoderEnv<'_> {
    fn oracle(&mut self, name: OracleName, x: u64) -> Step<u64> {
        self.partial().query(name, x).map_err(classify)
    }

    fn sam(&mut self, q: SamQuery) -> Step<u64> {
        q.validate()?;
        let gate = |p: &Program| p.is_gate_program();
        if !gate(&q.c_next) || q.c.as_ref().is_some_and(|c| !gate(c)) {
            return Err(Interrupt::Fail(Error::Unsupported("decoder needs gate programs in Sam queries".into())));
        }
        let p = q.permutation(self.hash);
        let (w, c) = match (&q.w, &q.c) {
            (Some(w), Some(c)) => (*w, c.clone()),
            _ => return Ok(p.eval(0)),
        };
        let target = c.eval_plain(w, &mut self.partial()).map_err(classify)?;
        for v in 0..1u64 << q.m() {
            let u = p.eval(v);
            match c.eval_plain(u, &mut self.partial()) {
                Ok(out) if out == target => return Ok(u),
                Ok(_) | Err(OracleError::Unknown { .. }) => {}
                Err(e) => return Err(Interrupt::Fail(e.into())),
            }
        }
        Err(Interrupt::Fail(Error::Decode("no evaluable preimage in decoder scan".into())))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub table: Vec<u64>,
    /// Targets settled by the halt rule rather than by the adversary's output.
    pub halts: usize,
}

/// Rebuilds `pi_n` from `aux`, the adversary, `h` and the other oracles in `context`.
pub fn decode(aux: &Aux, adv: &dyn Adversary, hash: &HashFamily, context: &mut World) -> Result<DecodeReport> {
    let n = aux.n;
    if adv.n() != n {
        return Err(Error::Param(format!("adversary works on n = {}, aux on n = {n}", adv.n())));
    }
    let mut view = aux.view();
    let mut halts = 0;
    for &y in &aux.y {
        let res = {
            let mut env = DecoderEnv { n, view: &view, context, hash };
            adv.run(y, &mut env)
        };
        let x = match res {
            Ok(Some(x)) => x,
            Err(Interrupt::Halt(q)) => {
                halts += 1;
                q
            }
            Ok(None) => return Err(Error::Decode(format!("adversary gave up on y = {y}"))),
            Err(Interrupt::Found(_)) => return Err(Error::Internal("monitor interrupt in decoder".into())),
            Err(Interrupt::Fail(e)) => return Err(e),
        };
        if x > mask(n) || aux.x.binary_search(&x).is_err() {
            return Err(Error::Decode(format!("preimage {x} of {y} outside X")));
        }
        view.set(x, y)?;
    }
    let table = view.table().ok_or_else(|| Error::Decode("permutation left incomplete".into()))?;
    Ok(DecodeReport { table, halts })
}

/// Direct search `x = 0, 1, ...` until `pi_n(x) = y`.
#[derive(Clone, Copy, Debug)]
pub struct BruteForce {
    pub n: u32,
}

impl Adversary for BruteForce {
    fn name(&self) -> String {
        "brute_force".into()
    }

    fn n(&self) -> u32 {
        self.n
    }

    fn run(&self, y: u64, env: &mut dyn SamAccess) -> Step<Option<u64>> {
        for x in 0..1u64 << self.n {
            if env.oracle(OracleName::Perm(self.n as u8), x)? == y {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }
}

/// Hardwired `pi_n` on the first quarter of the inputs; no queries at all.
#[derive(Clone, Debug)]
pub struct QuarterTable {
    pub n: u32,
    pub images: Vec<u64>,
}

impl QuarterTable {
    pub fn from_world(world: &mut World, n: u32) -> Result<Self> {
        let p = world.perm(n)?;
        let images = (0..1u64 << n >> 2).map(|x| p.eval(x)).collect::<std::result::Result<_, _>>()?;
        Ok(QuarterTable { n, images })
    }
}

impl Adversary for QuarterTable {
    fn name(&self) -> String {
        "quarter_table".into()
    }

    fn n(&self) -> u32 {
        self.n
    }

    fn run(&self, y: u64, _env: &mut dyn SamAccess) -> Step<Option<u64>> {
        Ok(self.images.iter().position(|&v| v == y).map(|i| i as u64))
    }
}

/// Uses Sam on programs that query `pi_n` only at 0, then searches directly
/// starting from the Sam answer.
#[derive(Clone, Copy, Debug)]
pub struct SamScan {
    pub n: u32,
}

impl SamScan {
    /// `C_1(w)` = low 2 bits of `w ^ pi(0)`; `C_2` appends the next 2 bits.
    pub fn programs(n: u32) -> Result<(Program, Program)> {
        if n < 4 {
            return Err(Error::Param(format!("sam_scan needs n >= 4, got {n}")));
        }
        let pi = OracleName::Perm(n as u8);
        let c1 = Program::gates(n, |b| {
            let zero = b.constant_word(0, n);
            let p0 = b.oracle(pi, &zero);
            let w = b.inputs();
            b.xor_word(&w[..2], &p0[..2])
        })?;
        let c2 = Program::extend_gates(&c1, |b, _| {
            let zero = b.constant_word(0, n);
            let p0 = b.oracle(pi, &zero);
            let w = b.inputs();
            b.xor_word(&w[2..4], &p0[2..4])
        })?;
        Ok((c1, c2))
    }
}

impl Adversary for SamScan {
    fn name(&self) -> String {
        "sam_scan".into()
    }

    fn n(&self) -> u32 {
        self.n
    }

    fn run(&self, y: u64, env: &mut dyn SamAccess) -> Step<Option<u64>> {
        let n = self.n;
        let pi = OracleName::Perm(n as u8);
        env.oracle(pi, 0)?;
        let (c1, c2) = SamScan::programs(n)?;
        let w1 = env.sam(SamQuery::root(c1.clone()))?;
        let w2 = env.sam(SamQuery::child(w1, c1, c2))?;
        for i in 0..1u64 << n {
            let x = (w2 + i) & mask(n);
            if env.oracle(pi, x)? == y {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }
}
