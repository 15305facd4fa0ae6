//! Fixtures shared by the benchmarks.

use samlab_core::attacks::fixed_world;
use samlab_core::circuit::mask;
use samlab_core::seed::master_seed;
use samlab_core::{HashFamily, Program, SamOracle, SamQuery, World};

/// A child query on `pi_m` whose preimage sets have `2^(m - keep)` points.
pub fn perm_prefix_query(m: u32, keep: u32, w: u64) -> SamQuery {
    let f = Program::apply_perm(m);
    let chain = Program::prefix_chain(&f, &[keep, keep + 1]).expect("valid prefix lengths");
    SamQuery::child(w & mask(m), chain[0].clone(), chain[1].clone())
}

pub fn world(m: u32, seed: u64) -> World {
    fixed_world(master_seed(seed), m).expect("domain within caps")
}

pub fn sam(seed: u64) -> SamOracle {
    SamOracle::new(HashFamily::new(master_seed(seed ^ 0x5a5a)))
}
