//! Core algorithms for context-guided generative image augmentation.
//!
//! This crate holds everything that does not touch the filesystem or the
//! network: image buffers, prompt construction, backend contracts with
//! deterministic mock implementations, hard-cosine filtration with
//! automatic per-class thresholds, pixel/patch mixing, run metrics, and
//! seed derivation. The companion `coremix` crate layers dataset IO, the
//! wire protocol, and the CLI on top.
//!
//! The crate is `no_std` (with `alloc`) so the algorithmic core stays
//! portable and free of incidental platform dependencies.

#![no_std]

extern crate alloc;

pub mod backend;
pub mod embedding;
pub mod filtration;
pub mod image;
pub mod metrics;
pub mod mixing;
pub mod mock;
pub mod prompt;
pub mod record;
pub mod sampling;
pub mod seed;

pub use backend::{BackendCapabilities, BackendError, EncoderBackend, GenerationRequest, GeneratorBackend};
pub use embedding::Embedding;
pub use filtration::{
    acquire_aligned, cosine_similarity, estimate_threshold, filter, AcquireOutcome,
    ClassThreshold, FailureReport, FiltrationDecision,
};
pub use image::ImageBuffer;
pub use metrics::{augmentation_overhead, summarize_run, OverheadInput, PhaseTimings, RunReport};
pub use mixing::{mix, mix_patch, mix_pixel, sample_mix_spec, MixConfig, MixSpec, PatchDirection, PatchRect};
pub use mock::{MockEncoder, MockGenerator};
pub use prompt::{build_prompt_pair, PromptPair, PromptTemplate};
pub use record::{AugmentationRecord, MixKind};
pub use seed::{derive_seed, derive_seeds, SampleSeeds};
