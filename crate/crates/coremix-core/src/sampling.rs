//! Seeded sampling without replacement.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Draws `count` distinct values from `[0, total)` using Floyd's
/// algorithm, returned in ascending order. Deterministic in `seed`.
/// `count` is clamped to `total`.
pub fn sample_without_replacement(total: u64, count: u64, seed: u64) -> Vec<u64> {
    let count = count.min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = BTreeSet::new();
    for upper in total - count..total {
        let candidate = rng.random_range(0..=upper);
        if !chosen.insert(candidate) {
            chosen.insert(upper);
        }
    }
    chosen.into_iter().collect()
}
