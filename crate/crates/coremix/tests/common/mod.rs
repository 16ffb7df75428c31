//! Shared fixtures for the integration and acceptance suites.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use coremix::pipeline::RunConfig;
use coremix::synth::{default_class_names, synth_dataset, SynthConfig};

/// Builds a synthetic dataset and returns `(dataset_root, prompts_path)`.
pub fn synth_fixture(root: &Path, classes: usize, images_per_class: u32, seed: u64) -> PathBuf {
    let config = SynthConfig {
        classes: default_class_names(classes),
        images_per_class,
        image_size: 64,
        dataset_type: "bird".into(),
        seed,
    };
    synth_dataset(root, &config).expect("synth dataset")
}

/// A mock-backed run configuration wired to the fixture's calibrated
/// template.
pub fn fixture_config(dataset_root: &Path, output_root: &Path, prompts: &Path) -> RunConfig {
    RunConfig {
        prompts_path: Some(prompts.to_path_buf()),
        allow_default_prompts: false,
        ..RunConfig::new(dataset_root, output_root, "bird")
    }
}

/// All files under `root` as `(relative path, bytes)`, sorted.
pub fn file_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).expect("read_dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .expect("under root")
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, std::fs::read(&path).expect("read file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
