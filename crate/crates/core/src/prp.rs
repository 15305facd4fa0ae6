//! Per-query pseudo-random permutations on `m`-bit strings.
//!
//! The permutation for a query is an 8-round unbalanced Feistel network. The
//! state is split into a low half of `a = m / 2` bits and a high half of
//! `b = m - a` bits; every round maps `(L, R) -> (R, L ^ F_k(R))`, truncating
//! `F` to the width of `L`. Because the halves swap widths each round, an even
//! number of rounds returns to the original split. Round keys come from
//! ChaCha20 seeded with `prf(master, "sam/h", canonical query bytes)`.

use rand::RngCore;

use crate::seed::{self, Seed};

pub const ROUNDS: usize = 8;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prp {
    m: u32,
    keys: [u64; ROUNDS],
}

impl Prp {
    pub fn from_seed(m: u32, seed: &Seed) -> Prp {
        assert!(m <= 62, "PRP width {m} too large");
        let mut r = seed::rng(seed);
        let mut keys = [0u64; ROUNDS];
        for k in keys.iter_mut() {
            *k = r.next_u64();
        }
        Prp { m, keys }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    #[inline]
    fn f(k: u64, r: u64) -> u64 {
        mix(r.wrapping_add(k).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ k.rotate_left(17))
    }

    pub fn eval(&self, x: u64) -> u64 {
        debug_assert!(x <= mask(self.m));
        if self.m == 0 {
            return 0;
        }
        let a = self.m / 2;
        let b = self.m - a;
        let (mut l, mut r) = (x & mask(a), x >> a);
        let (mut la, mut lb) = (a, b);
        for &k in &self.keys {
            let nl = r;
            let nr = l ^ (Self::f(k, r) & mask(la));
            l = nl;
            r = nr;
            std::mem::swap(&mut la, &mut lb);
        }
        l | (r << la)
    }

    pub fn invert(&self, y: u64) -> u64 {
        debug_assert!(y <= mask(self.m));
        if self.m == 0 {
            return 0;
        }
        let a = self.m / 2;
        let b = self.m - a;
        let (mut l, mut r) = (y & mask(a), y >> a);
        // width of l, r at the end of the forward pass (ROUNDS is even)
        let (mut la, mut lb) = (a, b);
        for &k in self.keys.iter().rev() {
            // forward step was (pl, pr) -> (pr, pl ^ F(pr)) with |pl| = lb, |pr| = la
            let pr = l;
            let pl = r ^ (Self::f(k, pr) & mask(lb));
            l = pl;
            r = pr;
            std::mem::swap(&mut la, &mut lb);
        }
        l | (r << la)
    }
}

/// The family `h = {h_q}` of per-query permutations under one master seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashFamily {
    master: Seed,
}

impl HashFamily {
    pub fn new(master: Seed) -> Self {
        HashFamily { master }
    }

    pub fn master(&self) -> &Seed {
        &self.master
    }

    /// Permutation keyed by canonical query bytes.
    pub fn perm(&self, query_bytes: &[u8], m: u32) -> Prp {
        Prp::from_seed(m, &seed::prf(&self.master, "sam/h", query_bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::master_seed;
    use proptest::prelude::*;

    #[test]
    fn bijective_on_small_widths() {
        for m in 0..=12 {
            let p = Prp::from_seed(m, &master_seed(m as u64));
            let mut seen = vec![false; 1 << m];
            for x in 0..1u64 << m {
                let y = p.eval(x);
                assert!(y < 1 << m);
                assert!(!seen[y as usize], "collision at m={m}");
                seen[y as usize] = true;
                assert_eq!(p.invert(y), x);
            }
        }
    }

    #[test]
    fn one_bit_is_xor_with_constant() {
        for s in 0..20 {
            let p = Prp::from_seed(1, &master_seed(s));
            assert_eq!(p.eval(0) ^ 1, p.eval(1));
        }
    }

    #[test]
    fn distinct_queries_give_distinct_permutations() {
        let h = HashFamily::new(master_seed(1));
        let p = h.perm(b"q1", 8);
        let q = h.perm(b"q2", 8);
        let agree = (0..256).filter(|&x| p.eval(x) == q.eval(x)).count();
        assert!(agree < 8, "agree = {agree}");
        assert_eq!(p, h.perm(b"q1", 8));
    }

    proptest! {
        #[test]
        fn invert_inverts(m in 1u32..=40, x in any::<u64>(), s in any::<u64>()) {
            let p = Prp::from_seed(m, &master_seed(s));
            let x = x & mask(m);
            let y = p.eval(x);
            prop_assert!(y <= mask(m));
            prop_assert_eq!(p.invert(y), x);
        }
    }
}
