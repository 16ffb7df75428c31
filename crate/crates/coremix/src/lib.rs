//! Generative image augmentation pipeline.
//!
//! Builds an augmented dataset by pairing each original image with a
//! generated counterpart from a text-to-image backend (guided by
//! contextual and negative prompts), keeping only counterparts that clear
//! a per-class cosine-similarity threshold in a pluggable embedding
//! space, and mixing the survivors with their originals at the pixel or
//! patch level. Every run writes a line-delimited manifest from which the
//! mixing stage can be replayed bit-exactly.
//!
//! The algorithmic core lives in [`coremix_core`], re-exported here as
//! [`core`]; this crate adds dataset IO, the HTTP backends and their
//! conformance stubs, the orchestrating pipeline, and the `coremix` CLI.

pub use coremix_core as core;

pub mod dataset;
pub mod imageio;
pub mod manifest;
pub mod pipeline;
pub mod remote;
pub mod report;
pub mod stub;
pub mod synth;
pub mod templates;

pub use dataset::{scan_dataset, ClassEntry, DatasetIndex, DatasetLayout};
pub use manifest::{read_manifest, write_manifest};
pub use pipeline::{replay, run, BackendChoice, PipelineError, RunConfig, RunOutcome};
pub use stub::{serve_stub, StubBehavior, StubHandle};
pub use synth::{synth_dataset, SynthConfig};
