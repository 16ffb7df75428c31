//! Deterministic mock backends.
//!
//! The mock generator renders a low-frequency color field keyed by the
//! prompt plus high-frequency detail keyed by the seed, so the prompt
//! decides "what class this looks like" and the seed decides the
//! instance. An optional corruption knob swaps the output for seeded
//! uniform noise, which the mock encoder maps far away from any natural
//! mock image — together they make filtration behavior observable
//! without a real text-to-image model.

use alloc::format;
use alloc::vec::Vec;

use crate::backend::{
    BackendCapabilities, BackendError, EncoderBackend, GenerationRequest, GeneratorBackend,
};
use crate::embedding::Embedding;
use crate::image::{ImageBuffer, ImageError, CHANNELS};

/// Pooling grid edge used by [`MockEncoder`]; embeddings have
/// `8 * 8 * 3 = 192` components.
pub const POOL_GRID: u32 = 8;
/// Dimension of every [`MockEncoder`] embedding.
pub const MOCK_EMBEDDING_DIM: usize = (POOL_GRID * POOL_GRID) as usize * CHANNELS;

/// Color-field levels. Cells take one of two mid-range values so that
/// instance noise up to [`DETAIL_AMPLITUDE`] (and the stronger noise used
/// by [`synthetic_original`]) never clamps at the channel bounds, which
/// would bias pooled statistics.
const FIELD_LO: f64 = 0.25;
const FIELD_HI: f64 = 0.75;
/// Peak amplitude of the per-seed high-frequency detail layer.
const DETAIL_AMPLITUDE: f64 = 0.06;
/// Peak amplitude of the per-instance noise in [`synthetic_original`].
const ORIGINAL_NOISE_AMPLITUDE: f64 = 0.2;

const TAG_FIELD: u64 = 0x4649454c44;
const TAG_DETAIL: u64 = 0x44455441494c;
const TAG_NOISE: u64 = 0x4e4f495345;
const TAG_CORRUPT: u64 = 0x434f5252555054;
const TAG_ORIGINAL: u64 = 0x4f524947;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn hash_bytes(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = seed ^ 0xcbf29ce484222325;
    for &b in bytes {
        h = (h ^ b as u64).wrapping_mul(0x100000001b3);
    }
    splitmix(h)
}

fn mix(h: u64, v: u64) -> u64 {
    splitmix(h ^ v.rotate_left(31))
}

/// Maps a hash to `[0, 1)`.
fn unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// The macro-cell a pixel belongs to, on the same grid the encoder pools
/// over (exact alignment whenever the dimensions are multiples of 8).
fn field_cell(coord: u32, extent: u32) -> u64 {
    (coord as u64 * POOL_GRID as u64) / extent as u64
}

fn field_value(prompt_key: u64, x: u32, y: u32, c: usize, width: u32, height: u32) -> f64 {
    let cell = field_cell(x, width) << 8 | field_cell(y, height) << 2 | c as u64;
    if mix(mix(prompt_key, TAG_FIELD), cell) & 1 == 0 {
        FIELD_LO
    } else {
        FIELD_HI
    }
}

fn pixel_key(key: u64, x: u32, y: u32, c: usize) -> u64 {
    mix(key, (x as u64) << 40 | (y as u64) << 8 | c as u64)
}

/// Deterministic text-to-image stand-in.
#[derive(Debug, Clone)]
pub struct MockGenerator {
    corrupt_fraction: f64,
}

impl MockGenerator {
    pub fn new() -> Self {
        Self { corrupt_fraction: 0.0 }
    }

    /// A generator that replaces its output with seeded uniform noise with
    /// probability `corrupt_fraction`, to exercise filtration.
    pub fn with_corruption(corrupt_fraction: f64) -> Result<Self, BackendError> {
        if !(0.0..=1.0).contains(&corrupt_fraction) || !corrupt_fraction.is_finite() {
            return Err(BackendError::InvalidRequest(format!(
                "corrupt_fraction {corrupt_fraction} must be in [0,1]"
            )));
        }
        Ok(Self { corrupt_fraction })
    }

    pub fn corrupt_fraction(&self) -> f64 {
        self.corrupt_fraction
    }
}

impl Default for MockGenerator {
    fn default() -> Self {
        Self::new()
    }
}

impl GeneratorBackend for MockGenerator {
    fn generate(&self, request: &GenerationRequest) -> Result<ImageBuffer, BackendError> {
        request.validate()?;
        let prompt_key = hash_bytes(0, request.prompt.as_bytes());
        let request_key = mix(hash_bytes(prompt_key, request.negative_prompt.as_bytes()), request.seed);
        let corrupted = unit(mix(request_key, TAG_CORRUPT)) < self.corrupt_fraction;
        let (width, height) = (request.width, request.height);
        let image = if corrupted {
            let noise_key = mix(request_key, TAG_NOISE);
            ImageBuffer::from_fn(height, width, |x, y, c| unit(pixel_key(noise_key, x, y, c)))
        } else {
            // Detail is keyed by seed and negative prompt only, so images
            // sharing a prompt stay close in the mock embedding space.
            let detail_key = mix(
                hash_bytes(request.seed, request.negative_prompt.as_bytes()),
                TAG_DETAIL,
            );
            ImageBuffer::from_fn(height, width, |x, y, c| {
                let base = field_value(prompt_key, x, y, c, width, height);
                base + (unit(pixel_key(detail_key, x, y, c)) * 2.0 - 1.0) * DETAIL_AMPLITUDE
            })
        };
        Ok(image.map_err(BackendError::Image)?.quantize_u8())
    }

    fn capabilities(&self) -> BackendCapabilities {
        BackendCapabilities {
            max_width: 4096,
            max_height: 4096,
            supports_negative_prompt: true,
            deterministic: true,
        }
    }
}

/// Deterministic encoder: average-pool to an 8×8×3 grid, flatten to 192
/// components, L2-normalize. Cosine similarity under this encoder is the
/// normalized correlation of pooled images.
#[derive(Debug, Clone, Default)]
pub struct MockEncoder;

impl MockEncoder {
    pub fn new() -> Self {
        Self
    }
}

/// Pooling ranges along one axis. Cells follow the floor partition
/// `[i*extent/8, (i+1)*extent/8)`; for extents below 8 the empty ranges
/// are widened to one pixel so every cell averages something.
fn pool_bounds(i: u32, extent: u32) -> (u32, u32) {
    let lo = (i * extent / POOL_GRID).min(extent - 1);
    let hi = ((i + 1) * extent / POOL_GRID).clamp(lo + 1, extent);
    (lo, hi)
}

impl EncoderBackend for MockEncoder {
    fn embed(&self, image: &ImageBuffer) -> Result<Embedding, BackendError> {
        let mut pooled = Vec::with_capacity(MOCK_EMBEDDING_DIM);
        for gy in 0..POOL_GRID {
            let (y0, y1) = pool_bounds(gy, image.height());
            for gx in 0..POOL_GRID {
                let (x0, x1) = pool_bounds(gx, image.width());
                let count = ((y1 - y0) * (x1 - x0)) as f64;
                for c in 0..CHANNELS {
                    let mut sum = 0.0;
                    for y in y0..y1 {
                        for x in x0..x1 {
                            sum += image.get(x, y, c);
                        }
                    }
                    pooled.push(sum / count);
                }
            }
        }
        let norm = libm::sqrt(pooled.iter().map(|v| v * v).sum());
        if norm > 0.0 {
            for v in &mut pooled {
                *v /= norm;
            }
        }
        Embedding::new(pooled, "mock").map_err(BackendError::Embedding)
    }

    fn dimension(&self) -> Option<usize> {
        Some(MOCK_EMBEDDING_DIM)
    }
}

/// A procedural stand-in for a natural photograph of the class a prompt
/// describes: the prompt's color field plus per-instance noise strong
/// enough that instances scatter around the class centroid. Generated
/// counterparts for the same prompt land nearer to each instance than the
/// instances sit to each other, which is what calibrated filtration
/// expects of real data.
pub fn synthetic_original(
    prompt: &str,
    instance: u64,
    height: u32,
    width: u32,
) -> Result<ImageBuffer, ImageError> {
    let prompt_key = hash_bytes(0, prompt.as_bytes());
    let instance_key = mix(mix(prompt_key, TAG_ORIGINAL), instance);
    Ok(ImageBuffer::from_fn(height, width, |x, y, c| {
        let base = field_value(prompt_key, x, y, c, width, height);
        base + (unit(pixel_key(instance_key, x, y, c)) * 2.0 - 1.0) * ORIGINAL_NOISE_AMPLITUDE
    })?
    .quantize_u8())
}
