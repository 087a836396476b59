//! Criterion benchmarks for `triquad-core`; see `benches/`.

use triquad_core::PrimePair;

/// Pairs used across benchmarks, from small to large radicands.
pub const PAIRS: [(u64, u64); 3] = [(17, 7), (241, 103), (977, 487)];

pub fn pair(i: usize) -> PrimePair {
    let (p, q) = PAIRS[i];
    PrimePair::new(p, q).expect("benchmark pair")
}
