//! The per-sample augmentation record, one line of the replayable manifest.

use alloc::string::String;

use crate::mixing::{MixSpec, PatchDirection, PatchRect};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordError {
    #[error("record {record_id}: accepted flag is inconsistent with similarity {similarity:?} vs tau {tau}")]
    AcceptanceMismatch { record_id: String, similarity: Option<f64>, tau: f64 },
    #[error("record {record_id}: mix_kind {mix_kind:?} is inconsistent with the populated mix fields")]
    MixFieldMismatch { record_id: String, mix_kind: MixKind },
    #[error("record {record_id}: attempts must be at least 1")]
    ZeroAttempts { record_id: String },
    #[error("record {record_id}: lambda {0} is outside [0,1]", .lambda)]
    InvalidLambda { record_id: String, lambda: f64 },
    #[error("record {record_id}: accepted records need generated_path and output_path; failures must omit them")]
    PathMismatch { record_id: String },
}

/// How the sample was mixed; `None` marks a sample whose retries were
/// exhausted and which therefore contributes no augmented image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixKind {
    Pixel,
    Patch,
    None,
}

/// One manifest line. Field names are the wire schema; every value needed
/// to replay the mix bit-exactly is recorded.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AugmentationRecord {
    pub record_id: String,
    pub class_name: String,
    pub source_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<f64>,
    pub tau: f64,
    pub accepted: bool,
    pub attempts: u32,
    pub mix_kind: MixKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch_rect: Option<PatchRect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch_direction: Option<PatchDirection>,
    pub eta_seed: u64,
    pub gen_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

impl AugmentationRecord {
    /// Checks every cross-field invariant. Run on write and on read, so a
    /// manifest on disk is always internally consistent.
    pub fn validate(&self) -> Result<(), RecordError> {
        let id = || self.record_id.clone();
        if self.attempts == 0 {
            return Err(RecordError::ZeroAttempts { record_id: id() });
        }
        let similarity_clears_tau = self.similarity.is_some_and(|s| s > self.tau);
        if self.accepted != similarity_clears_tau {
            return Err(RecordError::AcceptanceMismatch {
                record_id: id(),
                similarity: self.similarity,
                tau: self.tau,
            });
        }
        let fields_ok = match self.mix_kind {
            MixKind::Pixel => {
                self.lambda.is_some() && self.patch_rect.is_none() && self.patch_direction.is_none()
            }
            MixKind::Patch => {
                self.lambda.is_none() && self.patch_rect.is_some() && self.patch_direction.is_some()
            }
            MixKind::None => {
                self.lambda.is_none() && self.patch_rect.is_none() && self.patch_direction.is_none()
            }
        };
        if !fields_ok {
            return Err(RecordError::MixFieldMismatch { record_id: id(), mix_kind: self.mix_kind });
        }
        if let Some(lambda) = self.lambda {
            if !(0.0..=1.0).contains(&lambda) || !lambda.is_finite() {
                return Err(RecordError::InvalidLambda { record_id: id(), lambda });
            }
        }
        let has_outputs = self.generated_path.is_some() && self.output_path.is_some();
        let has_neither = self.generated_path.is_none() && self.output_path.is_none();
        let paths_ok = if self.accepted { has_outputs } else { has_neither };
        if !paths_ok || (self.accepted == (self.mix_kind == MixKind::None)) {
            return Err(RecordError::PathMismatch { record_id: id() });
        }
        Ok(())
    }

    /// Reconstructs the mixing parameters recorded for an accepted sample.
    pub fn mix_spec(&self) -> Option<MixSpec> {
        match self.mix_kind {
            MixKind::Pixel => Some(MixSpec::Pixel { lambda: self.lambda?, rng_seed: self.eta_seed }),
            MixKind::Patch => Some(MixSpec::Patch {
                rect: self.patch_rect?,
                direction: self.patch_direction?,
                rng_seed: self.eta_seed,
            }),
            MixKind::None => None,
        }
    }

    pub fn from_mix_spec(spec: &MixSpec) -> (MixKind, Option<f64>, Option<PatchRect>, Option<PatchDirection>) {
        match spec {
            MixSpec::Pixel { lambda, .. } => (MixKind::Pixel, Some(*lambda), None, None),
            MixSpec::Patch { rect, direction, .. } => (MixKind::Patch, None, Some(*rect), Some(*direction)),
        }
    }
}
