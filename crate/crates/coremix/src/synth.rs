//! Synthetic dataset generation.
//!
//! Produces a folder-per-class dataset of procedural images whose class
//! geometry matches what the mock backends expect, plus a prompt template
//! file calibrated to it. Useful for trying the pipeline without real
//! data and as the fixture generator for the test suite.

use std::path::{Path, PathBuf};

use coremix_core::mock::synthetic_original;
use coremix_core::prompt::build_prompt_pair;
use coremix_core::seed::derive_seed;
use coremix_core::PromptTemplate;

use crate::imageio::{self, ImageIoError};
use crate::templates::render_template;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Image(#[from] ImageIoError),
    #[error("failed to write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub classes: Vec<String>,
    pub images_per_class: u32,
    /// Edge length of the square images (a multiple of 8 keeps the mock
    /// field aligned with the encoder's pooling grid).
    pub image_size: u32,
    pub dataset_type: String,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: default_class_names(3),
            images_per_class: 20,
            image_size: 64,
            dataset_type: "bird".into(),
            seed: 0,
        }
    }
}

/// Class labels for generated datasets, in scan order.
pub fn default_class_names(count: usize) -> Vec<String> {
    const NAMES: [&str; 8] = [
        "cardinal", "finch", "heron", "jay", "sparrow", "swallow", "warbler", "wren",
    ];
    (0..count)
        .map(|i| {
            if i < NAMES.len() {
                NAMES[i].to_string()
            } else {
                format!("class-{i:02}")
            }
        })
        .collect()
}

/// A single-context template whose one pattern is the reference pattern of
/// the built-in family. Synthetic originals are keyed to the prompt this
/// template expands to, so runs over a synthetic dataset should use it
/// (synth writes it next to the dataset as `prompts.toml`).
pub fn calibration_template() -> PromptTemplate {
    let default = PromptTemplate::default_template();
    PromptTemplate::new(
        vec![default.context_patterns()[0].clone()],
        default.negative_patterns().to_vec(),
    )
    .expect("built-in patterns are valid")
}

/// The contextual prompt the synthetic images of `class_name` are built
/// around.
pub fn class_prompt(class_name: &str, dataset_type: &str) -> String {
    build_prompt_pair(&calibration_template(), class_name, dataset_type, 0, 7.0)
        .expect("calibration template is valid")
        .contextual
}

/// Writes the dataset under `root` and returns the path of the template
/// file it ships with.
pub fn synth_dataset(root: &Path, config: &SynthConfig) -> Result<PathBuf, SynthError> {
    if config.classes.is_empty() || config.images_per_class == 0 {
        return Err(SynthError::InvalidConfig(
            "need at least one class and one image per class".into(),
        ));
    }
    if config.image_size < 8 {
        return Err(SynthError::InvalidConfig("image_size must be at least 8".into()));
    }
    for class_name in &config.classes {
        let prompt = class_prompt(class_name, &config.dataset_type);
        for i in 0..config.images_per_class {
            let instance = derive_seed(
                config.seed,
                &[class_name.as_bytes(), &u64::from(i).to_le_bytes()],
            );
            let image = synthetic_original(&prompt, instance, config.image_size, config.image_size)
                .map_err(coremix_core::image::ImageError::from)
                .map_err(ImageIoError::Buffer)?;
            let path = root.join(class_name).join(format!("img_{i:03}.png"));
            imageio::save_png(&image, &path)?;
        }
    }
    let prompts_path = root.join("prompts.toml");
    std::fs::write(&prompts_path, render_template(&calibration_template())).map_err(|source| {
        SynthError::Io { path: prompts_path.display().to_string(), source }
    })?;
    Ok(prompts_path)
}
