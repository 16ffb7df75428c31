//! Dataset ingestion for the folder-per-class layout.

use std::fs;
use std::path::{Path, PathBuf};

use crate::imageio;

/// Supported on-disk layouts. Only the ImageNet-style folder-per-class
/// layout exists; adapters for other layouts would slot in here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetLayout {
    FolderPerClass,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("dataset root {} does not exist", .0.display())]
    MissingRoot(PathBuf),
    #[error("dataset root {} is not a directory", .0.display())]
    NotADirectory(PathBuf),
    #[error("no classes: {} contains no subdirectories", .0.display())]
    NoClasses(PathBuf),
    #[error("class {class_name} contains no decodable images")]
    EmptyClass { class_name: String },
    #[error("class directory {} has a non-UTF-8 name", .0.display())]
    NonUtf8Name(PathBuf),
    #[error("failed to read {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

/// One class: a label and the ordered list of its image paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEntry {
    pub class_name: String,
    /// Lexicographically ordered; this is the deterministic iteration
    /// order for all downstream sampling.
    pub image_paths: Vec<PathBuf>,
}

impl ClassEntry {
    /// Image count for the class (N_k).
    pub fn n_k(&self) -> usize {
        self.image_paths.len()
    }
}

/// The scanned dataset: classes in lexicographic order, plus any per-file
/// warnings produced while scanning (undecodable files are skipped, not
/// fatal).
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetIndex {
    pub root_path: PathBuf,
    /// Free-text domain descriptor (e.g. "bird", "car") substituted into
    /// prompt templates.
    pub dataset_type: String,
    pub classes: Vec<ClassEntry>,
    pub warnings: Vec<String>,
}

impl DatasetIndex {
    pub fn total_images(&self) -> usize {
        self.classes.iter().map(ClassEntry::n_k).sum()
    }

    pub fn class_sizes(&self) -> Vec<(String, u64)> {
        self.classes
            .iter()
            .map(|c| (c.class_name.clone(), c.n_k() as u64))
            .collect()
    }
}

/// Scans `root`, treating each immediate subdirectory as a class. Classes
/// and files are ordered lexicographically, so the same filesystem state
/// always produces the same index. Every image is decoded once during the
/// scan; files that fail to decode are skipped with a warning.
pub fn scan_dataset(
    root: &Path,
    layout: DatasetLayout,
    dataset_type: &str,
) -> Result<DatasetIndex, DatasetError> {
    let DatasetLayout::FolderPerClass = layout;
    if !root.exists() {
        return Err(DatasetError::MissingRoot(root.to_path_buf()));
    }
    if !root.is_dir() {
        return Err(DatasetError::NotADirectory(root.to_path_buf()));
    }
    let read_dir = |path: &Path| -> Result<Vec<PathBuf>, DatasetError> {
        let entries = fs::read_dir(path)
            .map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
        let mut paths: Vec<PathBuf> = entries.into_iter().map(|e| e.path()).collect();
        paths.sort();
        Ok(paths)
    };

    let mut classes = Vec::new();
    let mut warnings = Vec::new();
    for class_dir in read_dir(root)? {
        if !class_dir.is_dir() {
            continue;
        }
        let class_name = class_dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| DatasetError::NonUtf8Name(class_dir.clone()))?
            .to_string();
        let mut image_paths = Vec::new();
        for file in read_dir(&class_dir)? {
            if !file.is_file() {
                continue;
            }
            match imageio::load_image(&file) {
                Ok(_) => image_paths.push(file),
                Err(err) => warnings.push(format!("skipped {}: {err}", file.display())),
            }
        }
        if image_paths.is_empty() {
            return Err(DatasetError::EmptyClass { class_name });
        }
        classes.push(ClassEntry { class_name, image_paths });
    }
    if classes.is_empty() {
        return Err(DatasetError::NoClasses(root.to_path_buf()));
    }
    Ok(DatasetIndex {
        root_path: root.to_path_buf(),
        dataset_type: dataset_type.to_string(),
        classes,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use coremix_core::mock::synthetic_original;
    use std::fs;

    fn write_class(root: &Path, class: &str, count: usize) {
        for i in 0..count {
            let img = synthetic_original(&format!("a {class}"), i as u64, 24, 24).unwrap();
            crate::imageio::save_png(&img, &root.join(class).join(format!("img_{i:03}.png")))
                .unwrap();
        }
    }

    #[test]
    fn scans_classes_with_counts() {
        let dir = tempfile::tempdir().unwrap();
        write_class(dir.path(), "cardinal", 3);
        write_class(dir.path(), "jay", 2);
        let index = scan_dataset(dir.path(), DatasetLayout::FolderPerClass, "bird").unwrap();
        assert_eq!(index.classes.len(), 2);
        assert_eq!(index.classes[0].class_name, "cardinal");
        assert_eq!(index.classes[0].n_k(), 3);
        assert_eq!(index.classes[1].class_name, "jay");
        assert_eq!(index.classes[1].n_k(), 2);
        assert_eq!(index.dataset_type, "bird");
        assert!(index.warnings.is_empty());
    }

    #[test]
    fn missing_root_is_fatal() {
        assert!(matches!(
            scan_dataset(Path::new("/nonexistent-dataset"), DatasetLayout::FolderPerClass, "x"),
            Err(DatasetError::MissingRoot(_))
        ));
    }

    #[test]
    fn root_without_subdirectories_reports_no_classes() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("stray.txt"), "not a class").unwrap();
        assert!(matches!(
            scan_dataset(dir.path(), DatasetLayout::FolderPerClass, "x"),
            Err(DatasetError::NoClasses(_))
        ));
    }

    #[test]
    fn class_with_no_decodable_images_is_fatal_and_named() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("empty-class")).unwrap();
        fs::write(dir.path().join("empty-class/readme.txt"), "hi").unwrap();
        let err = scan_dataset(dir.path(), DatasetLayout::FolderPerClass, "x").unwrap_err();
        assert!(matches!(
            &err,
            DatasetError::EmptyClass { class_name } if class_name == "empty-class"
        ));
    }

    #[test]
    fn undecodable_images_are_skipped_with_a_warning() {
        let dir = tempfile::tempdir().unwrap();
        write_class(dir.path(), "cardinal", 2);
        fs::write(dir.path().join("cardinal/broken.png"), b"not a png").unwrap();
        let index = scan_dataset(dir.path(), DatasetLayout::FolderPerClass, "bird").unwrap();
        assert_eq!(index.classes[0].n_k(), 2);
        assert_eq!(index.warnings.len(), 1);
        assert!(index.warnings[0].contains("broken.png"));
    }

    #[test]
    fn scanning_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        write_class(dir.path(), "wren", 4);
        write_class(dir.path(), "finch", 2);
        let a = scan_dataset(dir.path(), DatasetLayout::FolderPerClass, "bird").unwrap();
        let b = scan_dataset(dir.path(), DatasetLayout::FolderPerClass, "bird").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn one_hundred_image_class_has_4950_candidate_pairs() {
        let dir = tempfile::tempdir().unwrap();
        write_class(dir.path(), "big", 100);
        let index = scan_dataset(dir.path(), DatasetLayout::FolderPerClass, "bird").unwrap();
        let n = index.classes[0].n_k() as u64;
        assert_eq!(n, 100);
        assert_eq!(n * (n - 1) / 2, 4950);
    }
}
