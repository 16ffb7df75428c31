//! Line-delimited manifest persistence.
//!
//! One JSON object per line, UTF-8, keys exactly matching the
//! [`AugmentationRecord`] field names. Writing an identical record
//! sequence twice produces byte-identical files. Records are validated on
//! both write and read, so a manifest on disk always satisfies the record
//! invariants.

use std::fs;
use std::path::Path;

use coremix_core::record::RecordError;
use coremix_core::AugmentationRecord;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("failed to access manifest {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("record {position} violates an invariant: {source}")]
    Invalid { position: usize, source: RecordError },
}

pub fn write_manifest(records: &[AugmentationRecord], path: &Path) -> Result<(), ManifestError> {
    let mut out = String::new();
    for (i, record) in records.iter().enumerate() {
        record
            .validate()
            .map_err(|source| ManifestError::Invalid { position: i + 1, source })?;
        out.push_str(&serde_json::to_string(record).expect("record serialization is infallible"));
        out.push('\n');
    }
    let io = |source| ManifestError::Io { path: path.display().to_string(), source };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io)?;
    }
    fs::write(path, out).map_err(io)
}

pub fn read_manifest(path: &Path) -> Result<Vec<AugmentationRecord>, ManifestError> {
    let text = fs::read_to_string(path)
        .map_err(|source| ManifestError::Io { path: path.display().to_string(), source })?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: AugmentationRecord = serde_json::from_str(line)
            .map_err(|e| ManifestError::Parse { line: i + 1, message: e.to_string() })?;
        record
            .validate()
            .map_err(|source| ManifestError::Invalid { position: i + 1, source })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use coremix_core::record::MixKind;
    use coremix_core::mixing::{PatchDirection, PatchRect};
    use proptest::prelude::*;

    fn record(id: usize, accepted: bool) -> AugmentationRecord {
        AugmentationRecord {
            record_id: format!("r{id:06}"),
            class_name: "cardinal".into(),
            source_path: format!("data/cardinal/img_{id:03}.png"),
            generated_path: accepted.then(|| format!("generated/cardinal/r{id:06}.png")),
            similarity: Some(if accepted { 0.95 } else { 0.41 }),
            tau: 0.9,
            accepted,
            attempts: if accepted { 1 } else { 5 },
            mix_kind: if accepted { MixKind::Pixel } else { MixKind::None },
            lambda: accepted.then_some(0.55),
            patch_rect: None,
            patch_direction: None,
            eta_seed: id as u64,
            gen_seed: id as u64 + 1,
            output_path: accepted.then(|| format!("cardinal/r{id:06}.png")),
        }
    }

    #[test]
    fn write_then_read_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let records: Vec<_> = (0..5).map(|i| record(i, i % 2 == 0)).collect();
        write_manifest(&records, &path).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), records);
    }

    #[test]
    fn zero_records_create_an_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        write_manifest(&[], &path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"");
        assert_eq!(read_manifest(&path).unwrap(), vec![]);
    }

    #[test]
    fn identical_sequences_write_byte_identical_files() {
        let dir = tempfile::tempdir().unwrap();
        let records: Vec<_> = (0..3).map(|i| record(i, true)).collect();
        let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
        write_manifest(&records, &a).unwrap();
        write_manifest(&records, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    }

    #[test]
    fn invariant_violations_are_rejected_before_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let mut bad = record(0, true);
        bad.similarity = Some(bad.tau - 0.1); // accepted=true but similarity <= tau
        let err = write_manifest(&[bad], &path).unwrap_err();
        assert!(matches!(err, ManifestError::Invalid { position: 1, .. }));
        assert!(!path.exists());
    }

    #[test]
    fn truncated_final_line_reports_its_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let records: Vec<_> = (0..2).map(|i| record(i, true)).collect();
        write_manifest(&records, &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 20);
        fs::write(&path, bytes).unwrap();
        let err = read_manifest(&path).unwrap_err();
        assert!(matches!(err, ManifestError::Parse { line: 2, .. }), "got {err}");
    }

    #[test]
    fn corrupt_records_on_read_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        // Hand-craft a line that parses but violates the acceptance rule.
        let mut r = record(0, true);
        r.accepted = false;
        r.mix_kind = MixKind::None;
        r.lambda = None;
        let line = serde_json::to_string(&r).unwrap();
        fs::write(&path, format!("{line}\n")).unwrap();
        assert!(matches!(
            read_manifest(&path).unwrap_err(),
            ManifestError::Invalid { position: 1, .. }
        ));
    }

    proptest! {
        // Round-trip over a mixture of pixel, patch, and failure records.
        #[test]
        fn roundtrip_preserves_fuzzed_records(
            seeds in proptest::collection::vec((0u64..u64::MAX, 0u8..3), 1..20)
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.jsonl");
            let records: Vec<_> = seeds.iter().enumerate().map(|(i, &(seed, kind))| {
                let mut r = record(i, kind != 2);
                r.eta_seed = seed;
                r.gen_seed = seed ^ 0xffff;
                r.similarity = Some(if kind == 2 { 0.3 } else { 0.91 + (seed % 100) as f64 * 1e-4 });
                if kind == 1 {
                    r.mix_kind = MixKind::Patch;
                    r.lambda = None;
                    r.patch_rect = Some(PatchRect { x: (seed % 7) as u32, y: 1, w: 3, h: 2 });
                    r.patch_direction = Some(if seed % 2 == 0 {
                        PatchDirection::OriginalOntoGenerated
                    } else {
                        PatchDirection::GeneratedOntoOriginal
                    });
                }
                r
            }).collect();
            write_manifest(&records, &path).unwrap();
            prop_assert_eq!(read_manifest(&path).unwrap(), records);
        }
    }
}
