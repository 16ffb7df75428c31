//! Contextual and negative prompt construction.
//!
//! Context patterns carry two placeholders, `<lab_name>` for the class
//! label and `<dataset_type>` for the domain descriptor. A sample's
//! variant index cycles through the pattern lists deterministically, so
//! repeated augmentation passes cover the template family without any
//! randomness.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub const LABEL_PLACEHOLDER: &str = "<lab_name>";
pub const DATASET_TYPE_PLACEHOLDER: &str = "<dataset_type>";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("template needs at least one context pattern")]
    NoContextPatterns,
    #[error("template needs at least one negative pattern")]
    NoNegativePatterns,
    #[error("context pattern {index} is missing placeholder {placeholder}: {pattern:?}")]
    MissingPlaceholder {
        index: usize,
        placeholder: &'static str,
        pattern: String,
    },
    #[error("class name must not be empty")]
    EmptyClassName,
    #[error("guidance scale must be positive and finite, got {0}")]
    InvalidGuidanceScale(f64),
}

/// A validated family of context and negative prompt patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    context_patterns: Vec<String>,
    negative_patterns: Vec<String>,
}

impl PromptTemplate {
    pub fn new(
        context_patterns: Vec<String>,
        negative_patterns: Vec<String>,
    ) -> Result<Self, PromptError> {
        if context_patterns.is_empty() {
            return Err(PromptError::NoContextPatterns);
        }
        if negative_patterns.is_empty() {
            return Err(PromptError::NoNegativePatterns);
        }
        for (index, pattern) in context_patterns.iter().enumerate() {
            for placeholder in [LABEL_PLACEHOLDER, DATASET_TYPE_PLACEHOLDER] {
                if !pattern.contains(placeholder) {
                    return Err(PromptError::MissingPlaceholder {
                        index,
                        placeholder,
                        pattern: pattern.clone(),
                    });
                }
            }
        }
        Ok(Self { context_patterns, negative_patterns })
    }

    /// The built-in template: a family of weather/scene context patterns of
    /// identical grammatical shape plus generic quality-suppressing
    /// negatives. Meant as a starting point; real runs usually ship their
    /// own template file.
    pub fn default_template() -> Self {
        let context = [
            "Generate heavy snow to the <lab_name>, a <dataset_type> object",
            "Generate heavy rain to the <lab_name>, a <dataset_type> object",
            "Generate dense fog to the <lab_name>, a <dataset_type> object",
            "Generate bright sunlight to the <lab_name>, a <dataset_type> object",
            "Generate autumn scenery to the <lab_name>, a <dataset_type> object",
        ];
        let negative = [
            "cartoon, illustration, painting",
            "blurry, distorted, deformed",
            "text, watermark, logo",
        ];
        Self {
            context_patterns: context.iter().map(|s| s.to_string()).collect(),
            negative_patterns: negative.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn context_patterns(&self) -> &[String] {
        &self.context_patterns
    }

    pub fn negative_patterns(&self) -> &[String] {
        &self.negative_patterns
    }
}

/// A fully expanded prompt pair plus the guidance scale that balances the
/// two conditioning terms at generation time.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptPair {
    pub contextual: String,
    pub negative: String,
    pub guidance_scale: f64,
}

/// Expands the pattern in a single left-to-right pass. Substituted values
/// are emitted verbatim and never rescanned, so a class label that happens
/// to contain placeholder syntax cannot trigger a second expansion.
fn expand(pattern: &str, class_name: &str, dataset_type: &str) -> String {
    let mut out = String::with_capacity(pattern.len() + class_name.len() + dataset_type.len());
    let mut rest = pattern;
    while let Some(pos) = rest.find('<') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if let Some(stripped) = tail.strip_prefix(LABEL_PLACEHOLDER) {
            out.push_str(class_name);
            rest = stripped;
        } else if let Some(stripped) = tail.strip_prefix(DATASET_TYPE_PLACEHOLDER) {
            out.push_str(dataset_type);
            rest = stripped;
        } else {
            out.push('<');
            rest = &tail[1..];
        }
    }
    out.push_str(rest);
    out
}

/// Builds the prompt pair for one augmentation variant. The variant index
/// cycles independently over the context and negative lists, so the map
/// from index to pair is periodic with period lcm(|context|, |negative|).
pub fn build_prompt_pair(
    template: &PromptTemplate,
    class_name: &str,
    dataset_type: &str,
    variant_index: usize,
    guidance_scale: f64,
) -> Result<PromptPair, PromptError> {
    if class_name.is_empty() {
        return Err(PromptError::EmptyClassName);
    }
    if !guidance_scale.is_finite() || guidance_scale <= 0.0 {
        return Err(PromptError::InvalidGuidanceScale(guidance_scale));
    }
    let context = &template.context_patterns[variant_index % template.context_patterns.len()];
    let negative = &template.negative_patterns[variant_index % template.negative_patterns.len()];
    Ok(PromptPair {
        contextual: expand(context, class_name, dataset_type),
        negative: negative.clone(),
        guidance_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    fn lcm(a: usize, b: usize) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        a / gcd(a, b) * b
    }

    #[test]
    fn default_template_expands_the_reference_pattern() {
        let template = PromptTemplate::default_template();
        let pair = build_prompt_pair(&template, "cardinal", "bird", 0, 7.0).unwrap();
        assert_eq!(pair.contextual, "Generate heavy snow to the cardinal, a bird object");
        assert_eq!(pair.negative, "cartoon, illustration, painting");
        assert_eq!(pair.guidance_scale, 7.0);
    }

    #[test]
    fn empty_class_name_is_rejected() {
        let template = PromptTemplate::default_template();
        assert_eq!(
            build_prompt_pair(&template, "", "bird", 0, 7.0),
            Err(PromptError::EmptyClassName)
        );
    }

    #[test]
    fn non_positive_guidance_scale_is_rejected() {
        let template = PromptTemplate::default_template();
        assert!(matches!(
            build_prompt_pair(&template, "jay", "bird", 0, 0.0),
            Err(PromptError::InvalidGuidanceScale(_))
        ));
    }

    #[test]
    fn identical_arguments_build_identical_pairs() {
        let template = PromptTemplate::default_template();
        let a = build_prompt_pair(&template, "jay", "bird", 3, 5.5).unwrap();
        let b = build_prompt_pair(&template, "jay", "bird", 3, 5.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pattern_missing_dataset_type_fails_validation() {
        let err = PromptTemplate::new(
            vec!["snowy <lab_name>".to_string()],
            vec!["blurry".to_string()],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            PromptError::MissingPlaceholder { index: 0, placeholder: DATASET_TYPE_PLACEHOLDER, .. }
        ));
    }

    #[test]
    fn empty_pattern_lists_fail_validation() {
        assert_eq!(
            PromptTemplate::new(vec![], vec!["x".to_string()]),
            Err(PromptError::NoContextPatterns)
        );
        assert_eq!(
            PromptTemplate::new(
                vec!["<lab_name> <dataset_type>".to_string()],
                vec![]
            ),
            Err(PromptError::NoNegativePatterns)
        );
    }

    #[test]
    fn variant_cycling_is_periodic_with_lcm_period() {
        let template = PromptTemplate::new(
            vec![
                "a <lab_name> <dataset_type>".to_string(),
                "b <lab_name> <dataset_type>".to_string(),
                "c <lab_name> <dataset_type>".to_string(),
            ],
            vec!["n0".to_string(), "n1".to_string()],
        )
        .unwrap();
        let period = lcm(3, 2);
        for v in 0..period {
            let lhs = build_prompt_pair(&template, "x", "y", v, 1.0).unwrap();
            let rhs = build_prompt_pair(&template, "x", "y", v + period, 1.0).unwrap();
            assert_eq!(lhs, rhs);
        }
        // No shorter period: consecutive indices within one cycle differ.
        let p0 = build_prompt_pair(&template, "x", "y", 0, 1.0).unwrap();
        for v in 1..period {
            assert_ne!(p0, build_prompt_pair(&template, "x", "y", v, 1.0).unwrap());
        }
    }

    proptest! {
        #[test]
        fn substitution_is_total(
            class in "[a-zA-Z0-9 _-]{1,24}",
            dtype in "[a-zA-Z0-9 _-]{0,16}",
            variant in 0usize..64,
        ) {
            let template = PromptTemplate::default_template();
            let pair = build_prompt_pair(&template, &class, &dtype, variant, 7.0).unwrap();
            prop_assert!(!pair.contextual.contains(LABEL_PLACEHOLDER));
            prop_assert!(!pair.contextual.contains(DATASET_TYPE_PLACEHOLDER));
            prop_assert!(pair.contextual.contains(class.as_str()));
        }

        #[test]
        fn expansion_places_values_exactly(class in "[a-z]{1,12}", dtype in "[a-z]{1,12}") {
            let expanded = expand(
                "Generate heavy snow to the <lab_name>, a <dataset_type> object",
                &class,
                &dtype,
            );
            prop_assert_eq!(
                expanded,
                format!("Generate heavy snow to the {class}, a {dtype} object")
            );
        }
    }
}
