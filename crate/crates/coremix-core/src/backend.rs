//! Contracts for the pluggable text-to-image and image-encoder backends.

use alloc::string::String;

use crate::embedding::{Embedding, EmbeddingError};
use crate::image::{ImageBuffer, ImageError};
use crate::prompt::PromptPair;

/// Minimum edge length accepted by generation backends.
pub const MIN_DIMENSION: u32 = 64;
/// Generation dimensions must be multiples of this (a common latent-space
/// constraint of text-to-image models).
pub const DIMENSION_MULTIPLE: u32 = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("request timed out")]
    Timeout,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("backend rejected request (status {status}): {message}")]
    Rejected { status: u16, message: String },
    #[error("backend server error (status {status}): {message}")]
    Server { status: u16, message: String },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("invalid generation request: {0}")]
    InvalidRequest(String),
    #[error("backend returned an invalid image: {0}")]
    Image(#[from] ImageError),
    #[error("backend returned an invalid embedding: {0}")]
    Embedding(#[from] EmbeddingError),
}

impl BackendError {
    /// Timeouts, transport failures, and 5xx responses are worth retrying;
    /// everything else indicates a bad request or a broken contract.
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Timeout | BackendError::Transport(_) | BackendError::Server { .. })
    }
}

/// One generation call: the prompt pair plus output geometry and seed.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub negative_prompt: String,
    pub guidance_scale: f64,
    pub width: u32,
    pub height: u32,
    pub seed: u64,
}

impl GenerationRequest {
    pub fn from_prompt(pair: &PromptPair, width: u32, height: u32, seed: u64) -> Result<Self, BackendError> {
        let request = Self {
            prompt: pair.contextual.clone(),
            negative_prompt: pair.negative.clone(),
            guidance_scale: pair.guidance_scale,
            width,
            height,
            seed,
        };
        request.validate()?;
        Ok(request)
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        for (name, value) in [("width", self.width), ("height", self.height)] {
            if value < MIN_DIMENSION {
                return Err(BackendError::InvalidRequest(alloc::format!(
                    "{name} {value} is below the minimum of {MIN_DIMENSION}"
                )));
            }
            if value % DIMENSION_MULTIPLE != 0 {
                return Err(BackendError::InvalidRequest(alloc::format!(
                    "{name} {value} is not a multiple of {DIMENSION_MULTIPLE}"
                )));
            }
        }
        if !self.guidance_scale.is_finite() || self.guidance_scale <= 0.0 {
            return Err(BackendError::InvalidRequest(alloc::format!(
                "guidance_scale {} must be positive and finite",
                self.guidance_scale
            )));
        }
        Ok(())
    }

    /// The same request with a different seed; used by filtration retries.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Rounds a source dimension up to the nearest value a generator accepts.
pub fn generation_dimension(source: u32) -> u32 {
    let clamped = source.max(MIN_DIMENSION);
    clamped.div_ceil(DIMENSION_MULTIPLE) * DIMENSION_MULTIPLE
}

/// What a generation backend can do; consulted before dispatching work.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendCapabilities {
    pub max_width: u32,
    pub max_height: u32,
    pub supports_negative_prompt: bool,
    /// Whether identical requests are guaranteed to produce identical
    /// images. Always true for the mock; remote backends self-report.
    pub deterministic: bool,
}

/// A text-to-image backend that produces one image per request.
///
/// Implementations must be safe for concurrent calls up to the pipeline's
/// configured in-flight limit.
pub trait GeneratorBackend: Sync {
    fn generate(&self, request: &GenerationRequest) -> Result<ImageBuffer, BackendError>;
    fn capabilities(&self) -> BackendCapabilities;
}

/// An image-encoder backend mapping images to fixed-dimension embeddings.
pub trait EncoderBackend: Sync {
    fn embed(&self, image: &ImageBuffer) -> Result<Embedding, BackendError>;
    /// The embedding dimension, when known up front. Remote encoders may
    /// only learn it from their first response.
    fn dimension(&self) -> Option<usize>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn request(width: u32, height: u32) -> GenerationRequest {
        GenerationRequest {
            prompt: "p".to_string(),
            negative_prompt: "n".to_string(),
            guidance_scale: 7.0,
            width,
            height,
            seed: 1,
        }
    }

    #[test]
    fn accepts_standard_dimensions() {
        assert!(request(512, 512).validate().is_ok());
        assert!(request(64, 128).validate().is_ok());
    }

    #[test]
    fn rejects_small_or_misaligned_dimensions() {
        assert!(request(60, 64).validate().is_err());
        assert!(request(64, 100).validate().is_err());
    }

    #[test]
    fn rejects_bad_guidance_scale() {
        let mut r = request(64, 64);
        r.guidance_scale = -1.0;
        assert!(r.validate().is_err());
    }

    #[test]
    fn generation_dimension_rounds_up() {
        assert_eq!(generation_dimension(1), 64);
        assert_eq!(generation_dimension(64), 64);
        assert_eq!(generation_dimension(65), 72);
        assert_eq!(generation_dimension(500), 504);
        assert_eq!(generation_dimension(512), 512);
    }
}
