//! Lazily sampled random permutations and trapdoor-permutation families.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::seed::{self, Seed};

pub const MAX_DOMAIN_BITS: u32 = 30;

/// Bit length of a permutation domain, `1..=30`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DomainParam(u8);

impl DomainParam {
    pub fn new(n: u32) -> Result<Self> {
        if (1..=MAX_DOMAIN_BITS).contains(&n) {
            Ok(DomainParam(n as u8))
        } else {
            Err(Error::Domain(n))
        }
    }

    pub fn bits(self) -> u32 {
        self.0 as u32
    }

    pub fn size(self) -> u64 {
        1u64 << self.0
    }

    pub fn contains(self, x: u64) -> bool {
        x < self.size()
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleError {
    #[error("value {value} does not fit in {bits} bits")]
    OutOfRange { value: u64, bits: u32 },
    #[error("oracle {0} is not available")]
    Unavailable(OracleName),
    /// A partial view was asked for a value it does not know.
    #[error("unknown value of {oracle} at {input}")]
    Unknown { oracle: OracleName, input: u64 },
    #[error("capability denied for {0}")]
    Denied(OracleName),
    #[error("query bound {0} exceeded")]
    BoundExceeded(u32),
}

/// Names of the oracles a program or adversary can call.
///
/// Input encodings: `Perm`, `PermInverse`, `TdpGen` take an `n`-bit value.
/// `TdpEval` takes `pk << n | x`, `TdpInvert` takes `td << n | y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OracleName {
    Perm(u8),
    PermInverse(u8),
    TdpGen(u8),
    TdpEval(u8),
    TdpInvert(u8),
}

impl OracleName {
    pub fn n(self) -> u32 {
        match self {
            OracleName::Perm(n)
            | OracleName::PermInverse(n)
            | OracleName::TdpGen(n)
            | OracleName::TdpEval(n)
            | OracleName::TdpInvert(n) => n as u32,
        }
    }

    pub fn input_len(self) -> u32 {
        match self {
            OracleName::TdpEval(n) | OracleName::TdpInvert(n) => 2 * n as u32,
            _ => self.n(),
        }
    }

    pub fn output_len(self) -> u32 {
        self.n()
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            OracleName::Perm(_) => 0,
            OracleName::PermInverse(_) => 1,
            OracleName::TdpGen(_) => 2,
            OracleName::TdpEval(_) => 3,
            OracleName::TdpInvert(_) => 4,
        }
    }
}

impl fmt::Display for OracleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleName::Perm(n) => write!(f, "pi_{n}"),
            OracleName::PermInverse(n) => write!(f, "pi_inv_{n}"),
            OracleName::TdpGen(n) => write!(f, "G_{n}"),
            OracleName::TdpEval(n) => write!(f, "F_{n}"),
            OracleName::TdpInvert(n) => write!(f, "F_inv_{n}"),
        }
    }
}

/// Anything that answers oracle queries.
pub trait OracleAccess {
    fn query(&mut self, name: OracleName, x: u64) -> std::result::Result<u64, OracleError>;
}

fn check_range(x: u64, bits: u32) -> std::result::Result<(), OracleError> {
    if bits < 64 && x >> bits != 0 {
        Err(OracleError::OutOfRange { value: x, bits })
    } else {
        Ok(())
    }
}

const NONE: u32 = u32::MAX;
const DENSE_MAX_BITS: u32 = 12;

#[derive(Clone)]
enum Store {
    Dense { fwd: Vec<u32>, bwd: Vec<u32> },
    Sparse { fwd: HashMap<u32, u32>, bwd: HashMap<u32, u32> },
}

impl Store {
    fn new(n: u32) -> Store {
        if n <= DENSE_MAX_BITS {
            Store::Dense { fwd: vec![NONE; 1 << n], bwd: vec![NONE; 1 << n] }
        } else {
            Store::Sparse { fwd: HashMap::new(), bwd: HashMap::new() }
        }
    }

    fn fwd(&self, x: u32) -> Option<u32> {
        match self {
            Store::Dense { fwd, .. } => Some(fwd[x as usize]).filter(|&v| v != NONE),
            Store::Sparse { fwd, .. } => fwd.get(&x).copied(),
        }
    }

    fn bwd(&self, y: u32) -> Option<u32> {
        match self {
            Store::Dense { bwd, .. } => Some(bwd[y as usize]).filter(|&v| v != NONE),
            Store::Sparse { bwd, .. } => bwd.get(&y).copied(),
        }
    }

    fn insert(&mut self, x: u32, y: u32) {
        assert!(self.fwd(x).is_none() && self.bwd(y).is_none(), "permutation conflict at {x} -> {y}");
        match self {
            Store::Dense { fwd, bwd } => {
                fwd[x as usize] = y;
                bwd[y as usize] = x;
            }
            Store::Sparse { fwd, bwd } => {
                fwd.insert(x, y);
                bwd.insert(y, x);
            }
        }
    }
}

/// A uniformly random permutation of `{0,1}^n`, sampled lazily.
///
/// Unqueried points are drawn by rejection among the unused outputs, so the
/// revealed mapping is a uniform partial permutation. Answers are a
/// deterministic function of the seed and the order of queries.
#[derive(Clone)]
pub struct PermutationOracle {
    n: DomainParam,
    seed: Seed,
    rng: ChaCha20Rng,
    store: Store,
    known: u64,
    eval_count: u64,
}

impl fmt::Debug for PermutationOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermutationOracle")
            .field("n", &self.n.bits())
            .field("known", &self.known)
            .field("eval_count", &self.eval_count)
            .finish()
    }
}

impl PermutationOracle {
    pub fn sample(n: DomainParam, seed: Seed) -> Self {
        PermutationOracle {
            n,
            seed,
            rng: seed::rng(&seed::prf(&seed, "perm/stream", &[])),
            store: Store::new(n.bits()),
            known: 0,
            eval_count: 0,
        }
    }

    /// Fully sampled permutation via Fisher-Yates, for exhaustive tests (`n <= 16`).
    pub fn full_table(n: DomainParam, seed: Seed) -> Result<Self> {
        if n.bits() > 16 {
            return Err(Error::Param(format!("full table needs n <= 16, got {}", n.bits())));
        }
        let mut table: Vec<u32> = (0..n.size() as u32).collect();
        table.shuffle(&mut seed::rng(&seed::prf(&seed, "perm/table", &[])));
        Self::from_table(n, seed, &table)
    }

    pub fn from_table(n: DomainParam, seed: Seed, table: &[u32]) -> Result<Self> {
        if table.len() as u64 != n.size() {
            return Err(Error::Param("table size does not match domain".into()));
        }
        let mut p = Self::sample(n, seed);
        let mut seen = vec![false; table.len()];
        for (x, &y) in table.iter().enumerate() {
            if y as u64 >= n.size() || seen[y as usize] {
                return Err(Error::Param("table is not a permutation".into()));
            }
            seen[y as usize] = true;
            p.store.insert(x as u32, y);
        }
        p.known = n.size();
        Ok(p)
    }

    pub fn n(&self) -> DomainParam {
        self.n
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    pub fn known_count(&self) -> u64 {
        self.known
    }

    fn fresh(&mut self, taken: impl Fn(&Store, u32) -> bool) -> u32 {
        let size = self.n.size();
        assert!(self.known < size, "permutation exhausted");
        // Rejection sampling while sparse, then a uniform pick among the free slots.
        if self.known * 2 < size {
            loop {
                let c = self.rng.gen_range(0..size) as u32;
                if !taken(&self.store, c) {
                    return c;
                }
            }
        }
        let free = size - self.known;
        let mut k = self.rng.gen_range(0..free);
        for c in 0..size as u32 {
            if !taken(&self.store, c) {
                if k == 0 {
                    return c;
                }
                k -= 1;
            }
        }
        unreachable!("free slot count out of sync")
    }

    pub fn eval(&mut self, x: u64) -> std::result::Result<u64, OracleError> {
        check_range(x, self.n.bits())?;
        self.eval_count += 1;
        if let Some(y) = self.store.fwd(x as u32) {
            return Ok(y as u64);
        }
        let y = self.fresh(|s, c| s.bwd(c).is_some());
        self.store.insert(x as u32, y);
        self.known += 1;
        Ok(y as u64)
    }

    /// Privileged inverse. Adversary handles never expose this.
    pub fn invert(&mut self, y: u64) -> std::result::Result<u64, OracleError> {
        check_range(y, self.n.bits())?;
        if let Some(x) = self.store.bwd(y as u32) {
            return Ok(x as u64);
        }
        let x = self.fresh(|s, c| s.fwd(c).is_some());
        self.store.insert(x, y as u32);
        self.known += 1;
        Ok(x as u64)
    }

    /// Value at `x` if already revealed; never samples.
    pub fn peek(&self, x: u64) -> Option<u64> {
        if !self.n.contains(x) {
            return None;
        }
        self.store.fwd(x as u32).map(|v| v as u64)
    }

    pub fn peek_inverse(&self, y: u64) -> Option<u64> {
        if !self.n.contains(y) {
            return None;
        }
        self.store.bwd(y as u32).map(|v| v as u64)
    }

    /// Forces every point and returns the table `x -> pi(x)`.
    pub fn table(&mut self) -> Vec<u64> {
        (0..self.n.size()).map(|x| self.eval(x).expect("in range")).collect()
    }
}

/// Random trapdoor permutation family: `G` maps trapdoors to public keys and
/// `F_pk` is an independent random permutation for every key.
#[derive(Clone, Debug)]
pub struct TdpOracle {
    n: DomainParam,
    seed: Seed,
    g: PermutationOracle,
    f: HashMap<u64, PermutationOracle>,
}

impl TdpOracle {
    pub fn sample(n: DomainParam, seed: Seed) -> Self {
        TdpOracle {
            n,
            seed,
            g: PermutationOracle::sample(n, seed::prf(&seed, "tdp/G", &[])),
            f: HashMap::new(),
        }
    }

    pub fn n(&self) -> DomainParam {
        self.n
    }

    pub fn gen(&mut self, td: u64) -> std::result::Result<u64, OracleError> {
        self.g.eval(td)
    }

    fn f_pk(&mut self, pk: u64) -> &mut PermutationOracle {
        let (n, seed) = (self.n, self.seed);
        self.f
            .entry(pk)
            .or_insert_with(|| PermutationOracle::sample(n, seed::prf(&seed, "tdp/F", &pk.to_le_bytes())))
    }

    pub fn eval(&mut self, pk: u64, x: u64) -> std::result::Result<u64, OracleError> {
        check_range(pk, self.n.bits())?;
        self.f_pk(pk).eval(x)
    }

    pub fn invert(&mut self, td: u64, y: u64) -> std::result::Result<u64, OracleError> {
        let pk = self.g.eval(td)?;
        self.f_pk(pk).invert(y)
    }
}

/// The full oracle world: one random permutation per input length (created on
/// first use) and optional trapdoor families.
#[derive(Clone, Debug)]
pub struct World {
    seed: Seed,
    perms: BTreeMap<u8, PermutationOracle>,
    tdps: BTreeMap<u8, TdpOracle>,
}

impl World {
    pub fn new(seed: Seed) -> Self {
        World { seed, perms: BTreeMap::new(), tdps: BTreeMap::new() }
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn perm(&mut self, n: u32) -> Result<&mut PermutationOracle> {
        let d = DomainParam::new(n)?;
        let seed = self.seed;
        Ok(self
            .perms
            .entry(n as u8)
            .or_insert_with(|| PermutationOracle::sample(d, seed::derive(&seed, "world/perm", n as u64))))
    }

    pub fn perm_ref(&self, n: u32) -> Option<&PermutationOracle> {
        self.perms.get(&(n as u8))
    }

    /// Replaces the length-`n` permutation, e.g. with a full table.
    pub fn set_perm(&mut self, p: PermutationOracle) {
        self.perms.insert(p.n().bits() as u8, p);
    }

    pub fn tdp(&mut self, n: u32) -> Result<&mut TdpOracle> {
        let d = DomainParam::new(n)?;
        let seed = self.seed;
        Ok(self
            .tdps
            .entry(n as u8)
            .or_insert_with(|| TdpOracle::sample(d, seed::derive(&seed, "world/tdp", n as u64))))
    }

    /// Eval-only handle: inverse queries are denied.
    pub fn adversary(&mut self) -> AdversaryHandle<'_> {
        AdversaryHandle(self)
    }

    fn answer(&mut self, name: OracleName, x: u64, privileged: bool) -> std::result::Result<u64, OracleError> {
        check_range(x, name.input_len())?;
        let n = name.n();
        let unavailable = |_| OracleError::Unavailable(name);
        match name {
            OracleName::Perm(_) => self.perm(n).map_err(unavailable)?.eval(x),
            OracleName::PermInverse(_) => {
                if !privileged {
                    return Err(OracleError::Denied(name));
                }
                self.perm(n).map_err(unavailable)?.invert(x)
            }
            OracleName::TdpGen(_) => self.tdp(n).map_err(unavailable)?.gen(x),
            OracleName::TdpEval(_) => {
                let mask = (1u64 << n) - 1;
                self.tdp(n).map_err(unavailable)?.eval(x >> n, x & mask)
            }
            OracleName::TdpInvert(_) => {
                let mask = (1u64 << n) - 1;
                self.tdp(n).map_err(unavailable)?.invert(x >> n, x & mask)
            }
        }
    }
}

impl OracleAccess for World {
    fn query(&mut self, name: OracleName, x: u64) -> std::result::Result<u64, OracleError> {
        self.answer(name, x, true)
    }
}

pub struct AdversaryHandle<'a>(&'a mut World);

impl OracleAccess for AdversaryHandle<'_> {
    fn query(&mut self, name: OracleName, x: u64) -> std::result::Result<u64, OracleError> {
        self.0.answer(name, x, false)
    }
}

/// Oracle that answers nothing; programs that make no calls can run against it.
pub struct NoOracle;

impl OracleAccess for NoOracle {
    fn query(&mut self, name: OracleName, _x: u64) -> std::result::Result<u64, OracleError> {
        Err(OracleError::Unavailable(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::master_seed;
    use std::collections::HashSet;

    fn d(n: u32) -> DomainParam {
        DomainParam::new(n).unwrap()
    }

    #[test]
    fn domain_cap() {
        assert!(DomainParam::new(0).is_err());
        assert!(DomainParam::new(31).is_err());
        assert_eq!(DomainParam::new(30).unwrap().size(), 1 << 30);
    }

    #[test]
    fn one_bit_domain_is_identity_or_swap_and_seeded() {
        let mut seen = HashSet::new();
        for s in 0..40 {
            let mut p = PermutationOracle::sample(d(1), master_seed(s));
            let t = (p.eval(0).unwrap(), p.eval(1).unwrap());
            assert!(t == (0, 1) || t == (1, 0));
            let mut q = PermutationOracle::sample(d(1), master_seed(s));
            assert_eq!(t, (q.eval(0).unwrap(), q.eval(1).unwrap()));
            seen.insert(t);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn full_enumeration_is_bijective() {
        for n in [6, 8, 13] {
            let mut p = PermutationOracle::sample(d(n), master_seed(n as u64));
            let mut out: Vec<u64> = p.table();
            out.sort_unstable();
            assert_eq!(out, (0..1u64 << n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn invert_round_trip_and_cache() {
        let mut p = PermutationOracle::sample(d(12), master_seed(3));
        let mut r = seed::rng(&master_seed(4));
        for _ in 0..100 {
            let x = r.gen_range(0..1 << 12);
            let y = p.eval(x).unwrap();
            assert_eq!(p.invert(y).unwrap(), x);
            assert_eq!(p.eval(x).unwrap(), y);
        }
        // inverse-first sampling stays consistent
        let x = p.invert(5).unwrap();
        assert_eq!(p.eval(x).unwrap(), 5);
    }

    #[test]
    fn out_of_range_is_rejected() {
        let mut p = PermutationOracle::sample(d(4), master_seed(0));
        assert!(matches!(p.eval(16), Err(OracleError::OutOfRange { .. })));
        assert!(p.invert(99).is_err());
    }

    #[test]
    fn full_table_is_permutation() {
        let mut p = PermutationOracle::full_table(d(10), master_seed(1)).unwrap();
        assert_eq!(p.known_count(), 1024);
        let t = p.table();
        assert_eq!(t.iter().collect::<HashSet<_>>().len(), 1024);
        assert!(PermutationOracle::full_table(d(17), master_seed(1)).is_err());
    }

    #[test]
    fn adversary_handle_denies_inverse() {
        let mut w = World::new(master_seed(9));
        let y = w.adversary().query(OracleName::Perm(5), 3).unwrap();
        assert_eq!(
            w.adversary().query(OracleName::PermInverse(5), y),
            Err(OracleError::Denied(OracleName::PermInverse(5)))
        );
        assert_eq!(w.query(OracleName::PermInverse(5), y).unwrap(), 3);
    }

    #[test]
    fn tdp_inverts_with_trapdoor() {
        let mut t = TdpOracle::sample(d(8), master_seed(11));
        let mut r = seed::rng(&master_seed(12));
        for _ in 0..200 {
            let (td, x) = (r.gen_range(0..256), r.gen_range(0..256));
            let pk = t.gen(td).unwrap();
            let y = t.eval(pk, x).unwrap();
            assert_eq!(t.invert(td, y).unwrap(), x);
        }
    }

    #[test]
    fn tdp_keys_distinct_and_deterministic() {
        let mut t = TdpOracle::sample(d(6), master_seed(2));
        let pks: HashSet<u64> = (0..64).map(|td| t.gen(td).unwrap()).collect();
        assert_eq!(pks.len(), 64);
        let mut a = TdpOracle::sample(d(6), master_seed(5));
        let mut b = TdpOracle::sample(d(6), master_seed(5));
        for i in 0..50u64 {
            assert_eq!(a.eval(i % 64, (i * 7) % 64).unwrap(), b.eval(i % 64, (i * 7) % 64).unwrap());
            assert_eq!(a.gen(i % 64).unwrap(), b.gen(i % 64).unwrap());
        }
    }

    #[test]
    fn world_tdp_encoding() {
        let mut w = World::new(master_seed(21));
        let pk = w.query(OracleName::TdpGen(6), 9).unwrap();
        let y = w.query(OracleName::TdpEval(6), pk << 6 | 17).unwrap();
        assert_eq!(w.query(OracleName::TdpInvert(6), 9 << 6 | y).unwrap(), 17);
    }
}
