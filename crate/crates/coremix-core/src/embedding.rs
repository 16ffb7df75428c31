//! Embedding vectors produced by encoder backends.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("embedding must have at least one component")]
    Empty,
    #[error("embedding component {index} is not finite: {value}")]
    NotFinite { index: usize, value: f64 },
    #[error("zero embedding: all components are 0 (source {source_id})")]
    Zero { source_id: String },
}

/// A fixed-dimension real vector in encoder space, guaranteed finite and
/// nonzero. `source_id` identifies the image it came from, for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    values: Vec<f64>,
    source_id: String,
}

impl Embedding {
    pub fn new(values: Vec<f64>, source_id: impl Into<String>) -> Result<Self, EmbeddingError> {
        let source_id = source_id.into();
        if values.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(EmbeddingError::NotFinite { index, value });
            }
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(EmbeddingError::Zero { source_id });
        }
        Ok(Self { values, source_id })
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|v| v * v).sum())
    }

    /// The same vector relabeled with a different source id.
    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_empty_vector() {
        assert_eq!(Embedding::new(vec![], "x"), Err(EmbeddingError::Empty));
    }

    #[test]
    fn rejects_zero_vector() {
        assert!(matches!(
            Embedding::new(vec![0.0, 0.0, 0.0], "img-3"),
            Err(EmbeddingError::Zero { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            Embedding::new(vec![1.0, f64::INFINITY], "x"),
            Err(EmbeddingError::NotFinite { index: 1, .. })
        ));
    }

    #[test]
    fn accepts_and_exposes_values() {
        let e = Embedding::new(vec![3.0, 4.0], "img-0").unwrap();
        assert_eq!(e.dimension(), 2);
        assert_eq!(e.source_id(), "img-0");
        assert!((e.norm() - 5.0).abs() < 1e-12);
    }
}
