//! Hard-cosine filtration.
//!
//! A generated image is kept only when its cosine similarity to the
//! original exceeds a per-class threshold. The threshold is estimated
//! automatically as the mean similarity over (a sample of) the distinct
//! pairs of original images in the class, so every class carries its own
//! notion of "semantically close enough".

use alloc::string::String;
use alloc::vec::Vec;

use crate::backend::{BackendError, EncoderBackend, GenerationRequest, GeneratorBackend};
use crate::embedding::Embedding;
use crate::image::ImageBuffer;
use crate::sampling::sample_without_replacement;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FiltrationError {
    #[error("embedding dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("class {class_name} has {count} embeddings; at least 2 are required for a threshold")]
    ClassTooSmall { class_name: String, count: usize },
    #[error("z_max must be at least 1")]
    ZeroPairBudget,
    #[error("max_retries must be at least 1")]
    ZeroRetries,
    #[error("generation attempt {attempt} failed: {source}")]
    Backend { attempt: u32, source: BackendError },
}

/// Cosine similarity of two embeddings, in `[-1, 1]` up to numerical slack.
pub fn cosine_similarity(a: &Embedding, b: &Embedding) -> Result<f64, FiltrationError> {
    if a.dimension() != b.dimension() {
        return Err(FiltrationError::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    for (&x, &y) in a.values().iter().zip(b.values()) {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    // Embeddings are nonzero by construction, so the norms are positive.
    Ok(dot / (libm::sqrt(norm_a) * libm::sqrt(norm_b)))
}

/// Per-class acceptance threshold, with the sampling evidence behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassThreshold {
    pub class_name: String,
    /// Mean similarity over the `pairs_used` evaluated pairs.
    pub tau: f64,
    /// Number of distinct unordered pairs the mean was taken over.
    pub pairs_used: u64,
    /// Total distinct unordered pairs available, C(N_k, 2).
    pub pairs_total: u64,
    pub seed: u64,
    /// True when every available pair entered the mean.
    pub exhaustive: bool,
}

fn pairs_total(n: usize) -> u64 {
    let n = n as u64;
    n * (n - 1) / 2
}

/// Maps a flat pair index in `[0, C(n,2))` to the unordered pair `(i, j)`,
/// `i < j`, in lexicographic order.
fn decode_pair(index: u64, n: usize) -> (usize, usize) {
    // Row i starts at offset i*(2n - i - 1)/2; binary search for the row.
    let n_u = n as u64;
    let row_start = |i: u64| i * (2 * n_u - i - 1) / 2;
    let (mut lo, mut hi) = (0u64, n_u - 1);
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if row_start(mid) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let i = if row_start(hi) <= index { hi } else { lo };
    let j = i + 1 + (index - row_start(i));
    (i as usize, j as usize)
}

/// Estimates the class threshold as the mean pairwise similarity of the
/// class's original-image embeddings.
///
/// All `C(N_k, 2)` distinct pairs enter the mean when the budget `z_max`
/// allows; otherwise exactly `z_max` pairs are sampled without
/// replacement using `seed`. Deterministic in `(inputs, seed)`.
pub fn estimate_threshold(
    class_name: impl Into<String>,
    class_embeddings: &[Embedding],
    z_max: u64,
    seed: u64,
) -> Result<ClassThreshold, FiltrationError> {
    let class_name = class_name.into();
    let n = class_embeddings.len();
    if n < 2 {
        return Err(FiltrationError::ClassTooSmall { class_name, count: n });
    }
    if z_max == 0 {
        return Err(FiltrationError::ZeroPairBudget);
    }
    let total = pairs_total(n);
    let exhaustive = total <= z_max;
    let mut sum = 0.0;
    let pairs_used = if exhaustive {
        for i in 0..n {
            for j in i + 1..n {
                sum += cosine_similarity(&class_embeddings[i], &class_embeddings[j])?;
            }
        }
        total
    } else {
        for index in sample_without_replacement(total, z_max, seed) {
            let (i, j) = decode_pair(index, n);
            sum += cosine_similarity(&class_embeddings[i], &class_embeddings[j])?;
        }
        z_max
    };
    Ok(ClassThreshold {
        class_name,
        tau: sum / pairs_used as f64,
        pairs_used,
        pairs_total: total,
        seed,
        exhaustive,
    })
}

/// Outcome of scoring one generated image against its original.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationDecision {
    pub similarity: f64,
    pub tau: f64,
    /// `similarity > tau`, strictly; a tie discards.
    pub retained: bool,
}

/// Applies the retention rule to a generated embedding.
pub fn filter(
    original: &Embedding,
    generated: &Embedding,
    threshold: &ClassThreshold,
) -> Result<FiltrationDecision, FiltrationError> {
    let similarity = cosine_similarity(original, generated)?;
    Ok(FiltrationDecision {
        similarity,
        tau: threshold.tau,
        retained: similarity > threshold.tau,
    })
}

/// A retained generative counterpart together with its winning decision.
#[derive(Debug, Clone)]
pub struct AcquireSuccess {
    pub image: ImageBuffer,
    pub embedding: Embedding,
    pub decision: FiltrationDecision,
    /// 1-based attempt that produced the retained image.
    pub attempts: u32,
}

/// All attempts were discarded; carries the evidence for the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureReport {
    pub attempts: u32,
    /// Similarity of every attempt, in order.
    pub similarities: Vec<f64>,
    pub tau: f64,
}

#[derive(Debug, Clone)]
pub enum AcquireOutcome {
    Retained(AcquireSuccess),
    Exhausted(FailureReport),
}

/// Generates counterparts with seeds `seed, seed+1, ...` until one clears
/// the class threshold, giving up after `max_retries` rejections.
pub fn acquire_aligned(
    original: &Embedding,
    request_base: &GenerationRequest,
    generator: &dyn GeneratorBackend,
    encoder: &dyn EncoderBackend,
    threshold: &ClassThreshold,
    max_retries: u32,
) -> Result<AcquireOutcome, FiltrationError> {
    if max_retries == 0 {
        return Err(FiltrationError::ZeroRetries);
    }
    let mut similarities = Vec::with_capacity(max_retries as usize);
    for attempt in 1..=max_retries {
        let request = request_base.with_seed(request_base.seed.wrapping_add(attempt as u64 - 1));
        let backend = |source| FiltrationError::Backend { attempt, source };
        let image = generator.generate(&request).map_err(backend)?;
        let embedding = encoder.embed(&image).map_err(backend)?;
        let decision = filter(original, &embedding, threshold)?;
        similarities.push(decision.similarity);
        if decision.retained {
            return Ok(AcquireOutcome::Retained(AcquireSuccess {
                image,
                embedding,
                decision,
                attempts: attempt,
            }));
        }
    }
    Ok(AcquireOutcome::Exhausted(FailureReport {
        attempts: max_retries,
        similarities,
        tau: threshold.tau,
    }))
}
