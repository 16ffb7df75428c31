//! Pixel- and patch-level mixing of an original image with its retained
//! generative counterpart.
//!
//! Pixel mixing is the convex blend `lambda*original + (1-lambda)*generated`;
//! patch mixing cuts an axis-aligned rectangle from one image and pastes
//! it onto the other. A per-sample Bernoulli trial picks between the two.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::ImageBuffer;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MixError {
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("lambda {0} is outside [0,1]")]
    InvalidLambda(f64),
    #[error("patch {rect:?} does not fit a {width}x{height} image")]
    PatchOutOfBounds { rect: PatchRect, width: u32, height: u32 },
    #[error("patch must have positive area, got {0}x{1}")]
    EmptyPatch(u32, u32),
    #[error("invalid mix config: {0}")]
    InvalidConfig(alloc::string::String),
}

/// Axis-aligned patch rectangle, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PatchRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl PatchRect {
    fn check(&self, width: u32, height: u32) -> Result<(), MixError> {
        if self.w == 0 || self.h == 0 {
            return Err(MixError::EmptyPatch(self.w, self.h));
        }
        let fits = self.x.checked_add(self.w).is_some_and(|r| r <= width)
            && self.y.checked_add(self.h).is_some_and(|b| b <= height);
        if !fits {
            return Err(MixError::PatchOutOfBounds { rect: *self, width, height });
        }
        Ok(())
    }

    fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

/// Which image donates the patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchDirection {
    /// Cut from the original, paste onto the generated image.
    OriginalOntoGenerated,
    /// Cut from the generated image, paste onto the original.
    GeneratedOntoOriginal,
}

/// Fully resolved mixing parameters for one sample.
#[derive(Debug, Clone, PartialEq)]
pub enum MixSpec {
    Pixel { lambda: f64, rng_seed: u64 },
    Patch { rect: PatchRect, direction: PatchDirection, rng_seed: u64 },
}

impl MixSpec {
    /// The Bernoulli outcome this spec encodes: 1 selects pixel mixing.
    pub fn eta(&self) -> u8 {
        match self {
            MixSpec::Pixel { .. } => 1,
            MixSpec::Patch { .. } => 0,
        }
    }

    pub fn rng_seed(&self) -> u64 {
        match self {
            MixSpec::Pixel { rng_seed, .. } | MixSpec::Patch { rng_seed, .. } => *rng_seed,
        }
    }
}

/// Sampling ranges for [`sample_mix_spec`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixConfig {
    /// Probability that a sample uses pixel mixing.
    pub pi: f64,
    /// Uniform range for the pixel-mix blend ratio.
    pub lambda_range: (f64, f64),
    /// Uniform range for the patch area as a fraction of the image area.
    pub patch_area_range: (f64, f64),
    /// Uniform range for the patch aspect ratio (width / height).
    pub patch_aspect_range: (f64, f64),
}

impl Default for MixConfig {
    fn default() -> Self {
        Self {
            pi: 0.5,
            lambda_range: (0.3, 0.7),
            patch_area_range: (0.1, 0.5),
            patch_aspect_range: (0.5, 2.0),
        }
    }
}

impl MixConfig {
    pub fn validate(&self) -> Result<(), MixError> {
        let err = |msg: alloc::string::String| Err(MixError::InvalidConfig(msg));
        if !self.pi.is_finite() || !(0.0..=1.0).contains(&self.pi) {
            return err(alloc::format!("pi {} must be in [0,1]", self.pi));
        }
        for (name, (lo, hi), bounds) in [
            ("lambda_range", self.lambda_range, Some((0.0, 1.0))),
            ("patch_area_range", self.patch_area_range, Some((0.0, 1.0))),
            ("patch_aspect_range", self.patch_aspect_range, None),
        ] {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return err(alloc::format!("{name} ({lo}, {hi}) must satisfy min <= max"));
            }
            if let Some((b_lo, b_hi)) = bounds {
                if lo < b_lo || hi > b_hi {
                    return err(alloc::format!("{name} ({lo}, {hi}) must lie within [{b_lo}, {b_hi}]"));
                }
            }
        }
        if self.patch_area_range.0 <= 0.0 {
            return err(alloc::format!(
                "patch_area_range min {} must be positive",
                self.patch_area_range.0
            ));
        }
        if self.patch_aspect_range.0 <= 0.0 {
            return err(alloc::format!(
                "patch_aspect_range min {} must be positive",
                self.patch_aspect_range.0
            ));
        }
        Ok(())
    }
}

/// Convex per-pixel blend: `out = lambda*original + (1-lambda)*generated`.
pub fn mix_pixel(
    original: &ImageBuffer,
    generated: &ImageBuffer,
    lambda: f64,
) -> Result<ImageBuffer, MixError> {
    check_dimensions(original, generated)?;
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(MixError::InvalidLambda(lambda));
    }
    let data = original
        .data()
        .iter()
        .zip(generated.data())
        .map(|(&o, &g)| lambda * o + (1.0 - lambda) * g)
        .collect();
    // Values stay within [min(o,g), max(o,g)]; reuse the validated path.
    Ok(ImageBuffer::new(original.height(), original.width(), data)
        .expect("convex blend of valid images is valid"))
}

/// Rectangle cut-and-paste. With `OriginalOntoGenerated` the output equals
/// the generated image everywhere except inside `rect`, which is copied
/// from the original; the other direction swaps the roles.
pub fn mix_patch(
    original: &ImageBuffer,
    generated: &ImageBuffer,
    rect: PatchRect,
    direction: PatchDirection,
) -> Result<ImageBuffer, MixError> {
    check_dimensions(original, generated)?;
    rect.check(original.width(), original.height())?;
    let (patch, base) = match direction {
        PatchDirection::OriginalOntoGenerated => (original, generated),
        PatchDirection::GeneratedOntoOriginal => (generated, original),
    };
    ImageBuffer::from_fn(original.height(), original.width(), |x, y, c| {
        if rect.contains(x, y) {
            patch.get(x, y, c)
        } else {
            base.get(x, y, c)
        }
    })
    .map_err(|_| unreachable!("dimensions already validated"))
}

/// Draws the mixing decision for one sample: a Bernoulli(`pi`) trial picks
/// pixel vs. patch mixing, then the branch-specific parameters are drawn
/// from the configured ranges. Deterministic in `(seed, dims, config)`.
pub fn sample_mix_spec(
    rng_seed: u64,
    height: u32,
    width: u32,
    config: &MixConfig,
) -> Result<MixSpec, MixError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| lo + rng.random::<f64>() * (hi - lo);

    if rng.random::<f64>() < config.pi {
        let lambda = uniform(&mut rng, config.lambda_range);
        return Ok(MixSpec::Pixel { lambda, rng_seed });
    }

    let area_ratio = uniform(&mut rng, config.patch_area_range);
    let aspect = uniform(&mut rng, config.patch_aspect_range);
    let target_area = area_ratio * width as f64 * height as f64;
    let w = libm::round(libm::sqrt(target_area * aspect)).clamp(1.0, width as f64) as u32;
    let h = libm::round(target_area / w as f64).clamp(1.0, height as f64) as u32;
    let x = rng.random_range(0..=width - w);
    let y = rng.random_range(0..=height - h);
    let direction = if rng.random::<f64>() < 0.5 {
        PatchDirection::OriginalOntoGenerated
    } else {
        PatchDirection::GeneratedOntoOriginal
    };
    Ok(MixSpec::Patch { rect: PatchRect { x, y, w, h }, direction, rng_seed })
}

/// Dispatches to [`mix_pixel`] or [`mix_patch`] per the spec.
pub fn mix(
    original: &ImageBuffer,
    generated: &ImageBuffer,
    spec: &MixSpec,
) -> Result<ImageBuffer, MixError> {
    match spec {
        MixSpec::Pixel { lambda, .. } => mix_pixel(original, generated, *lambda),
        MixSpec::Patch { rect, direction, .. } => mix_patch(original, generated, *rect, *direction),
    }
}

fn check_dimensions(a: &ImageBuffer, b: &ImageBuffer) -> Result<(), MixError> {
    if !a.same_dimensions(b) {
        return Err(MixError::DimensionMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    Ok(())
}
