//! Run accounting: discard statistics, phase timings, and the
//! augmentation-overhead figure.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;

use crate::record::AugmentationRecord;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("baseline training time must be positive")]
    ZeroBaseline,
}

/// Measured training times feeding the overhead formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverheadInput {
    /// Training time with augmented data (generation excluded; images are
    /// produced beforehand and cached).
    pub t_aug: Duration,
    /// Baseline training time without augmentation.
    pub t_van: Duration,
}

/// Relative training-time increase in percent:
/// `(t_aug - t_van) / t_van * 100`. Negative when augmentation is faster.
pub fn augmentation_overhead(input: OverheadInput) -> Result<f64, MetricsError> {
    let t_van = input.t_van.as_secs_f64();
    if t_van <= 0.0 {
        return Err(MetricsError::ZeroBaseline);
    }
    let t_aug = input.t_aug.as_secs_f64();
    Ok((t_aug - t_van) / t_van * 100.0)
}

/// Wall-clock totals per pipeline phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhaseTimings {
    pub scan: Duration,
    pub thresholds: Duration,
    pub generation: Duration,
    pub mixing: Duration,
    pub io: Duration,
}

/// Per-class accounting derived from the manifest records.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    pub class_name: String,
    /// Original images in the class, when the dataset is at hand;
    /// summaries built from a manifest alone leave it unset.
    pub n_k: Option<u64>,
    pub tau: f64,
    /// Generation attempts (accepted + discarded).
    pub generated: u64,
    pub accepted: u64,
    pub discarded: u64,
    /// Samples whose retries were exhausted.
    pub failures: u64,
    /// `discarded / generated`, in percent; absent when nothing was
    /// generated for the class.
    pub discard_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Totals {
    pub records: u64,
    pub generated: u64,
    pub accepted: u64,
    pub discarded: u64,
    pub failures: u64,
    pub discard_rate: Option<f64>,
}

/// The end-of-run report: per-class stats, totals, and phase timings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub classes: Vec<ClassSummary>,
    pub totals: Totals,
    pub timings: PhaseTimings,
    /// Set when measured training times were supplied; the pipeline itself
    /// never trains, so runs leave it absent.
    pub augmentation_overhead: Option<f64>,
    pub complete: bool,
}

fn rate(discarded: u64, generated: u64) -> Option<f64> {
    (generated > 0).then(|| discarded as f64 / generated as f64 * 100.0)
}

/// Aggregates manifest records into the run report.
///
/// Every record accounts for `attempts` generation calls: an accepted
/// record spent `attempts - 1` on discarded images, a failed record spent
/// all of them.
pub fn summarize_run(
    records: &[AugmentationRecord],
    class_sizes: &[(String, u64)],
    timings: PhaseTimings,
) -> RunReport {
    let sizes: BTreeMap<&str, u64> = class_sizes.iter().map(|(name, n)| (name.as_str(), *n)).collect();
    let mut classes: BTreeMap<&str, ClassSummary> = BTreeMap::new();
    for record in records {
        let entry = classes.entry(&record.class_name).or_insert_with(|| ClassSummary {
            class_name: record.class_name.clone(),
            n_k: sizes.get(record.class_name.as_str()).copied(),
            tau: record.tau,
            generated: 0,
            accepted: 0,
            discarded: 0,
            failures: 0,
            discard_rate: None,
        });
        entry.generated += record.attempts as u64;
        if record.accepted {
            entry.accepted += 1;
            entry.discarded += record.attempts as u64 - 1;
        } else {
            entry.failures += 1;
            entry.discarded += record.attempts as u64;
        }
    }

    let mut totals = Totals { records: records.len() as u64, ..Totals::default() };
    let classes: Vec<ClassSummary> = classes
        .into_values()
        .map(|mut class| {
            class.discard_rate = rate(class.discarded, class.generated);
            totals.generated += class.generated;
            totals.accepted += class.accepted;
            totals.discarded += class.discarded;
            totals.failures += class.failures;
            class
        })
        .collect();
    totals.discard_rate = rate(totals.discarded, totals.generated);

    RunReport {
        classes,
        totals,
        timings,
        augmentation_overhead: None,
        complete: true,
    }
}
