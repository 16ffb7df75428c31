//! End-to-end orchestration: scan, estimate thresholds, generate and
//! filter counterparts, mix, and persist images plus the replayable
//! manifest and report.
//!
//! All per-sample randomness is derived up front from the master seed, so
//! the bounded worker pool can process samples in any order without
//! affecting the outputs: with deterministic backends, a run is a pure
//! function of `(dataset, config)`.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use coremix_core::backend::generation_dimension;
use coremix_core::filtration::FiltrationError;
use coremix_core::metrics::{summarize_run, PhaseTimings, RunReport};
use coremix_core::mixing::MixError;
use coremix_core::prompt::PromptError;
use coremix_core::record::MixKind;
use coremix_core::sampling::sample_without_replacement;
use coremix_core::seed::{derive_seed, derive_seeds};
use coremix_core::{
    acquire_aligned, build_prompt_pair, mix, sample_mix_spec, AcquireOutcome, AugmentationRecord,
    ClassThreshold, Embedding, EncoderBackend, GenerationRequest, GeneratorBackend, MixConfig,
    MockEncoder, MockGenerator, PromptPair,
};

use crate::dataset::{scan_dataset, DatasetError, DatasetLayout};
use crate::imageio::{self, ImageIoError};
use crate::manifest::{read_manifest, write_manifest, ManifestError};
use crate::remote::{RemoteEncoder, RemoteGenerator};
use crate::report::write_report;
use crate::templates::{resolve_templates, TemplateError};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const REPORT_FILE: &str = "report";
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";
/// Subdirectory of the output root holding the retained generated images.
pub const GENERATED_DIR: &str = "generated";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    ImageIo(#[from] ImageIoError),
    #[error("failed to write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("prompt construction failed for class {class}: {source}")]
    Prompt { class: String, source: PromptError },
    #[error("embedding failed for {source_id}: {source}")]
    Embed { source_id: String, source: coremix_core::BackendError },
    #[error("threshold estimation failed for class {class}: {source}")]
    Threshold { class: String, source: FiltrationError },
    #[error("sample {record_id}: {source}")]
    Sample { record_id: String, source: FiltrationError },
    #[error("mixing failed for {record_id}: {source}")]
    Mix { record_id: String, source: MixError },
    #[error("invalid image for {record_id}: {source}")]
    Image { record_id: String, source: coremix_core::image::ImageError },
    #[error("replay requires {0} to be an accepted record with mix parameters")]
    NotReplayable(String),
}

/// Which backend pair serves the run.
#[derive(Debug, Clone, PartialEq)]
pub enum BackendChoice {
    Mock { corrupt_fraction: f64 },
    Remote { gen_url: String, embed_url: String, timeout: Duration },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset_root: PathBuf,
    pub output_root: PathBuf,
    pub dataset_type: String,
    /// Fraction of each class to augment, in percent (the `-50` and
    /// `-100` pipeline variants).
    pub augment_percent: f64,
    pub backend: BackendChoice,
    pub prompts_path: Option<PathBuf>,
    pub allow_default_prompts: bool,
    pub guidance_scale: f64,
    /// Pair budget for threshold estimation (`z_max`).
    pub tau_pairs: u64,
    pub max_retries: u32,
    /// Base seed for threshold pair sampling; defaults to the master seed.
    pub filter_seed: Option<u64>,
    pub mix: MixConfig,
    /// Base seed for mix sampling; defaults to the master seed.
    pub mix_seed: Option<u64>,
    pub master_seed: u64,
    pub concurrency: usize,
}

impl RunConfig {
    /// A mock-backed configuration with the documented defaults.
    pub fn new(
        dataset_root: impl Into<PathBuf>,
        output_root: impl Into<PathBuf>,
        dataset_type: impl Into<String>,
    ) -> Self {
        Self {
            dataset_root: dataset_root.into(),
            output_root: output_root.into(),
            dataset_type: dataset_type.into(),
            augment_percent: 100.0,
            backend: BackendChoice::Mock { corrupt_fraction: 0.0 },
            prompts_path: None,
            allow_default_prompts: true,
            guidance_scale: 7.0,
            tau_pairs: 500,
            max_retries: 5,
            filter_seed: None,
            mix: MixConfig::default(),
            mix_seed: None,
            master_seed: 0,
            concurrency: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: String| Err(PipelineError::InvalidConfig(msg));
        if !(self.augment_percent > 0.0 && self.augment_percent <= 100.0) {
            return fail(format!(
                "augment_percent {} must be in (0, 100]",
                self.augment_percent
            ));
        }
        if self.concurrency == 0 {
            return fail("concurrency must be at least 1".into());
        }
        if self.max_retries == 0 {
            return fail("max_retries must be at least 1".into());
        }
        if self.tau_pairs == 0 {
            return fail("tau_pairs must be at least 1".into());
        }
        if !self.guidance_scale.is_finite() || self.guidance_scale <= 0.0 {
            return fail(format!("guidance_scale {} must be positive", self.guidance_scale));
        }
        if let BackendChoice::Mock { corrupt_fraction } = self.backend {
            if !(0.0..=1.0).contains(&corrupt_fraction) {
                return fail(format!("corrupt_fraction {corrupt_fraction} must be in [0,1]"));
            }
        }
        self.mix
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub records: Vec<AugmentationRecord>,
    pub manifest_path: PathBuf,
    pub report_path: PathBuf,
}

enum Backends {
    Mock(MockGenerator, MockEncoder),
    Remote(RemoteGenerator, RemoteEncoder),
}

impl Backends {
    fn build(choice: &BackendChoice) -> Result<Self, PipelineError> {
        match choice {
            BackendChoice::Mock { corrupt_fraction } => Ok(Backends::Mock(
                MockGenerator::with_corruption(*corrupt_fraction)
                    .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?,
                MockEncoder::new(),
            )),
            BackendChoice::Remote { gen_url, embed_url, timeout } => Ok(Backends::Remote(
                RemoteGenerator::new(gen_url.clone(), *timeout),
                RemoteEncoder::new(embed_url.clone(), *timeout),
            )),
        }
    }

    fn as_refs(&self) -> (&dyn GeneratorBackend, &dyn EncoderBackend) {
        match self {
            Backends::Mock(g, e) => (g, e),
            Backends::Remote(g, e) => (g, e),
        }
    }
}

struct Task {
    record_id: String,
    class_name: String,
    source_path: PathBuf,
    original: Embedding,
    threshold: ClassThreshold,
    prompt: PromptPair,
    gen_seed: u64,
    mix_seed: u64,
}

struct TaskOutput {
    record: AugmentationRecord,
    generation: Duration,
    mixing: Duration,
    io: Duration,
}

/// Runs the full pipeline. On a fatal error the records completed so far
/// are flushed to the manifest, an `INCOMPLETE` marker is written next to
/// it, and the error is returned.
pub fn run(config: &RunConfig) -> Result<RunOutcome, PipelineError> {
    config.validate()?;
    let out = &config.output_root;
    std::fs::create_dir_all(out)
        .map_err(|source| PipelineError::Io { path: out.display().to_string(), source })?;
    // A marker from an earlier aborted run must not survive a clean one.
    let _ = std::fs::remove_file(out.join(INCOMPLETE_MARKER));

    let mut timings = PhaseTimings::default();
    let started = Instant::now();
    let index = scan_dataset(&config.dataset_root, DatasetLayout::FolderPerClass, &config.dataset_type)?;
    timings.scan = started.elapsed();
    for warning in &index.warnings {
        log::warn!("{warning}");
    }
    let class_sizes = index.class_sizes();

    let template = resolve_templates(config.prompts_path.as_deref(), config.allow_default_prompts)?;
    let backends = Backends::build(&config.backend)?;
    let (generator, encoder) = backends.as_refs();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.concurrency)
        .build()
        .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;

    // Fatal-error path: flush whatever completed, mark the run incomplete.
    let abort = |records: Vec<AugmentationRecord>,
                 timings: PhaseTimings,
                 error: PipelineError|
     -> PipelineError {
        let manifest_path = out.join(MANIFEST_FILE);
        if let Err(flush) = write_manifest(&records, &manifest_path) {
            log::error!("failed to flush partial manifest: {flush}");
        }
        let mut report = summarize_run(&records, &class_sizes, timings);
        report.complete = false;
        if let Err(e) = write_report(&report, &out.join(REPORT_FILE)) {
            log::error!("failed to write report: {e}");
        }
        if let Err(e) = std::fs::write(out.join(INCOMPLETE_MARKER), format!("{error}\n")) {
            log::error!("failed to write incomplete marker: {e}");
        }
        error
    };

    // Phase: per-class thresholds from the original images' embeddings,
    // which are computed once and reused for filtration.
    let started = Instant::now();
    let filter_base = config.filter_seed.unwrap_or(config.master_seed);
    let embeds: Vec<Result<Vec<Embedding>, PipelineError>> = pool.install(|| {
        use rayon::prelude::*;
        index
            .classes
            .par_iter()
            .map(|class| {
                class
                    .image_paths
                    .par_iter()
                    .map(|path| {
                        let image = imageio::load_image(path)?;
                        let source_id = path.display().to_string();
                        encoder
                            .embed(&image)
                            .map(|e| e.with_source_id(source_id.clone()))
                            .map_err(|source| PipelineError::Embed { source_id, source })
                    })
                    .collect()
            })
            .collect()
    });
    let mut class_embeddings = Vec::with_capacity(index.classes.len());
    for result in embeds {
        match result {
            Ok(list) => class_embeddings.push(list),
            Err(e) => return Err(abort(Vec::new(), timings, e)),
        }
    }
    let mut thresholds = Vec::with_capacity(index.classes.len());
    for (class, embeddings) in index.classes.iter().zip(&class_embeddings) {
        let tau_seed = derive_seed(filter_base, &[class.class_name.as_bytes(), b"tau"]);
        match coremix_core::estimate_threshold(&class.class_name, embeddings, config.tau_pairs, tau_seed)
        {
            Ok(threshold) => {
                log::info!(
                    "class {}: tau={:.6} over {}/{} pairs",
                    class.class_name,
                    threshold.tau,
                    threshold.pairs_used,
                    threshold.pairs_total
                );
                thresholds.push(threshold);
            }
            Err(source) => {
                let error = PipelineError::Threshold { class: class.class_name.clone(), source };
                return Err(abort(Vec::new(), timings, error));
            }
        }
    }
    timings.thresholds = started.elapsed();

    // Sample selection and task construction. The per-class counter drives
    // both prompt-variant cycling and seed derivation.
    let mut tasks = Vec::new();
    for ((class, embeddings), threshold) in
        index.classes.iter().zip(&class_embeddings).zip(&thresholds)
    {
        let n_k = class.n_k();
        let quota = ((config.augment_percent / 100.0) * n_k as f64).ceil() as usize;
        let quota = quota.clamp(1, n_k);
        let selected: Vec<usize> = if quota == n_k {
            (0..n_k).collect()
        } else {
            let select_seed =
                derive_seed(config.master_seed, &[class.class_name.as_bytes(), b"select"]);
            sample_without_replacement(n_k as u64, quota as u64, select_seed)
                .into_iter()
                .map(|v| v as usize)
                .collect()
        };
        for (counter, image_index) in selected.into_iter().enumerate() {
            let seeds = derive_seeds(config.master_seed, &class.class_name, counter as u64);
            let mix_seed = match config.mix_seed {
                Some(base) => derive_seeds(base, &class.class_name, counter as u64).mix_seed,
                None => seeds.mix_seed,
            };
            let prompt = build_prompt_pair(
                &template,
                &class.class_name,
                &index.dataset_type,
                counter,
                config.guidance_scale,
            )
            .map_err(|source| PipelineError::Prompt { class: class.class_name.clone(), source })?;
            tasks.push(Task {
                record_id: format!("r{:06}", tasks.len()),
                class_name: class.class_name.clone(),
                source_path: class.image_paths[image_index].clone(),
                original: embeddings[image_index].clone(),
                threshold: threshold.clone(),
                prompt,
                gen_seed: seeds.gen_seed,
                mix_seed,
            });
        }
    }

    // Phase: bounded-concurrency generation, filtration, and mixing.
    // Results come back in task order regardless of scheduling.
    let outputs: Vec<Result<TaskOutput, PipelineError>> = pool.install(|| {
        use rayon::prelude::*;
        tasks
            .par_iter()
            .map(|task| process_task(task, config, generator, encoder))
            .collect()
    });

    let mut records = Vec::with_capacity(outputs.len());
    let mut first_error = None;
    for output in outputs {
        match output {
            Ok(done) => {
                timings.generation += done.generation;
                timings.mixing += done.mixing;
                timings.io += done.io;
                records.push(done.record);
            }
            Err(e) => first_error = first_error.or(Some(e)),
        }
    }
    if let Some(error) = first_error {
        return Err(abort(records, timings, error));
    }

    let manifest_path = out.join(MANIFEST_FILE);
    write_manifest(&records, &manifest_path)?;
    let report = summarize_run(&records, &class_sizes, timings);
    let report_path = out.join(REPORT_FILE);
    write_report(&report, &report_path)
        .map_err(|source| PipelineError::Io { path: report_path.display().to_string(), source })?;
    Ok(RunOutcome { report, records, manifest_path, report_path })
}

fn process_task(
    task: &Task,
    config: &RunConfig,
    generator: &dyn GeneratorBackend,
    encoder: &dyn EncoderBackend,
) -> Result<TaskOutput, PipelineError> {
    let record_id = &task.record_id;
    let sample_err =
        |source| PipelineError::Sample { record_id: record_id.clone(), source };

    let started = Instant::now();
    let source = imageio::load_image(&task.source_path)?;
    let mut io = started.elapsed();

    let request = GenerationRequest::from_prompt(
        &task.prompt,
        generation_dimension(source.width()),
        generation_dimension(source.height()),
        task.gen_seed,
    )
    .map_err(|e| sample_err(FiltrationError::Backend { attempt: 0, source: e }))?;

    let started = Instant::now();
    let outcome = acquire_aligned(
        &task.original,
        &request,
        generator,
        encoder,
        &task.threshold,
        config.max_retries,
    )
    .map_err(sample_err)?;
    let generation = started.elapsed();

    let record = match outcome {
        AcquireOutcome::Retained(success) => {
            let generated_rel = format!("{GENERATED_DIR}/{}/{}.png", task.class_name, record_id);
            let output_rel = format!("{}/{}.png", task.class_name, record_id);

            let started = Instant::now();
            imageio::save_png(&success.image, &config.output_root.join(&generated_rel))?;
            io += started.elapsed();

            let started = Instant::now();
            let resized = success
                .image
                .resize_bilinear(source.height(), source.width())
                .map_err(|source| PipelineError::Image { record_id: record_id.clone(), source })?;
            let spec = sample_mix_spec(task.mix_seed, source.height(), source.width(), &config.mix)
                .map_err(|source| PipelineError::Mix { record_id: record_id.clone(), source })?;
            let mixed = mix(&source, &resized, &spec)
                .map_err(|source| PipelineError::Mix { record_id: record_id.clone(), source })?;
            let mixing = started.elapsed();

            let started = Instant::now();
            imageio::save_png(&mixed, &config.output_root.join(&output_rel))?;
            io += started.elapsed();

            let (mix_kind, lambda, patch_rect, patch_direction) =
                AugmentationRecord::from_mix_spec(&spec);
            let record = AugmentationRecord {
                record_id: record_id.clone(),
                class_name: task.class_name.clone(),
                source_path: task.source_path.display().to_string(),
                generated_path: Some(generated_rel),
                similarity: Some(success.decision.similarity),
                tau: success.decision.tau,
                accepted: true,
                attempts: success.attempts,
                mix_kind,
                lambda,
                patch_rect,
                patch_direction,
                eta_seed: task.mix_seed,
                gen_seed: task.gen_seed,
                output_path: Some(output_rel),
            };
            return Ok(TaskOutput { record, generation, mixing, io });
        }
        AcquireOutcome::Exhausted(failure) => AugmentationRecord {
            record_id: record_id.clone(),
            class_name: task.class_name.clone(),
            source_path: task.source_path.display().to_string(),
            generated_path: None,
            similarity: failure.similarities.last().copied(),
            tau: failure.tau,
            accepted: false,
            attempts: failure.attempts,
            mix_kind: MixKind::None,
            lambda: None,
            patch_rect: None,
            patch_direction: None,
            eta_seed: task.mix_seed,
            gen_seed: task.gen_seed,
            output_path: None,
        },
    };
    Ok(TaskOutput { record, generation, mixing: Duration::ZERO, io })
}

/// Resolves a stored path against the manifest's directory: absolute paths
/// pass through, relative paths are joined to `base` when that exists, and
/// otherwise are tried as given (relative to the working directory).
fn resolve_path(stored: &str, base: &Path) -> PathBuf {
    let path = Path::new(stored);
    if path.is_absolute() {
        return path.to_path_buf();
    }
    let joined = base.join(path);
    if joined.exists() {
        joined
    } else {
        path.to_path_buf()
    }
}

/// Re-runs the mixing stage from a manifest alone, writing every mixed
/// image under `out_root`. With the same source and generated images this
/// reproduces the original outputs bit-exactly. Returns the number of
/// images written.
pub fn replay(manifest_path: &Path, out_root: &Path) -> Result<u64, PipelineError> {
    let records = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut written = 0;
    for record in &records {
        if !record.accepted {
            continue;
        }
        let spec = record
            .mix_spec()
            .ok_or_else(|| PipelineError::NotReplayable(record.record_id.clone()))?;
        let generated_rel = record
            .generated_path
            .as_ref()
            .ok_or_else(|| PipelineError::NotReplayable(record.record_id.clone()))?;
        let output_rel = record
            .output_path
            .as_ref()
            .ok_or_else(|| PipelineError::NotReplayable(record.record_id.clone()))?;
        let source = imageio::load_image(&resolve_path(&record.source_path, base))?;
        let generated = imageio::load_image(&resolve_path(generated_rel, base))?;
        let resized = generated
            .resize_bilinear(source.height(), source.width())
            .map_err(|source| PipelineError::Image { record_id: record.record_id.clone(), source })?;
        let mixed = mix(&source, &resized, &spec)
            .map_err(|source| PipelineError::Mix { record_id: record.record_id.clone(), source })?;
        imageio::save_png(&mixed, &out_root.join(output_rel))?;
        written += 1;
    }
    Ok(written)
}

/// Summarizes an existing manifest without the dataset at hand (class
/// sizes and timings are unavailable).
pub fn report_from_manifest(manifest_path: &Path) -> Result<RunReport, PipelineError> {
    let records = read_manifest(manifest_path)?;
    Ok(summarize_run(&records, &[], PhaseTimings::default()))
}

