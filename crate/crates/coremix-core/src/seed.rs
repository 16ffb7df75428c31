//! Deterministic seed derivation.
//!
//! Every random decision in a run is keyed by a seed derived from the
//! master seed, the class name, the per-class sample index, and a role
//! tag. Derivation goes through SHA-256, so seeds are collision-resistant
//! and workers can process samples in any order without affecting the
//! outcome.

use sha2::{Digest, Sha256};

/// Derives a 64-bit seed from a master seed and an ordered list of
/// context parts. Parts are length-prefixed, so `["ab", "c"]` and
/// `["a", "bc"]` derive different seeds.
pub fn derive_seed(master_seed: u64, parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// The independent seeds one sample consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSeeds {
    /// First generation seed; retries advance it by one per attempt.
    pub gen_seed: u64,
    /// Seed for the mixing decision (the Bernoulli trial and its
    /// branch parameters).
    pub mix_seed: u64,
    /// Seed reserved for filtration-side randomness.
    pub filter_seed: u64,
}

/// Derives the per-sample seed triple for `(class_name, sample_index)`.
pub fn derive_seeds(master_seed: u64, class_name: &str, sample_index: u64) -> SampleSeeds {
    let index = sample_index.to_le_bytes();
    let role = |tag: &str| {
        derive_seed(master_seed, &[class_name.as_bytes(), &index, tag.as_bytes()])
    };
    SampleSeeds {
        gen_seed: role("gen"),
        mix_seed: role("mix"),
        filter_seed: role("filter"),
    }
}
