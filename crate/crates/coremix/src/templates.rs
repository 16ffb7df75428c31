//! Prompt template configuration files.
//!
//! ```toml
//! context_patterns = [
//!     "Generate heavy snow to the <lab_name>, a <dataset_type> object",
//! ]
//! negative_patterns = [
//!     "cartoon, illustration, painting",
//! ]
//! ```
//!
//! `negative_patterns` may be omitted, in which case the built-in negative
//! list applies. `context_patterns` is required and each entry must carry
//! both placeholders.

use std::fs;
use std::path::Path;

use coremix_core::prompt::PromptError;
use coremix_core::PromptTemplate;

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("template file {path} not found (pass --allow-default-prompts to fall back to the built-in template)")]
    NotFound { path: String },
    #[error("no template configured: pass --prompts <path> or --allow-default-prompts")]
    NotConfigured,
    #[error("failed to read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed template file {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("invalid template in {path}: {source}")]
    Invalid { path: String, source: PromptError },
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateFile {
    context_patterns: Vec<String>,
    #[serde(default)]
    negative_patterns: Option<Vec<String>>,
}

/// Parses and validates a template file.
pub fn load_templates(path: &Path) -> Result<PromptTemplate, TemplateError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| TemplateError::Io {
        path: display.clone(),
        source,
    })?;
    let parsed: TemplateFile = toml::from_str(&text).map_err(|e| TemplateError::Malformed {
        path: display.clone(),
        message: e.to_string(),
    })?;
    let negative = parsed
        .negative_patterns
        .unwrap_or_else(|| PromptTemplate::default_template().negative_patterns().to_vec());
    PromptTemplate::new(parsed.context_patterns, negative)
        .map_err(|source| TemplateError::Invalid { path: display, source })
}

/// Resolves the template for a run: an existing file wins; a missing or
/// unspecified file falls back to the built-in template only when
/// explicitly allowed.
pub fn resolve_templates(
    path: Option<&Path>,
    allow_default: bool,
) -> Result<PromptTemplate, TemplateError> {
    match path {
        Some(path) if path.exists() => load_templates(path),
        Some(path) => {
            if allow_default {
                Ok(PromptTemplate::default_template())
            } else {
                Err(TemplateError::NotFound { path: path.display().to_string() })
            }
        }
        None => {
            if allow_default {
                Ok(PromptTemplate::default_template())
            } else {
                Err(TemplateError::NotConfigured)
            }
        }
    }
}

/// Serializes a template back to the config format (used by `synth` to
/// ship a matching template next to a generated dataset).
pub fn render_template(template: &PromptTemplate) -> String {
    let quote = |items: &[String]| {
        items
            .iter()
            .map(|s| format!("    {:?},\n", s))
            .collect::<String>()
    };
    format!(
        "context_patterns = [\n{}]\nnegative_patterns = [\n{}]\n",
        quote(template.context_patterns()),
        quote(template.negative_patterns()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("prompts.toml");
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn parses_patterns_in_file_order() {
        let (_dir, path) = write_file(
            r#"
context_patterns = [
    "a <lab_name>, a <dataset_type>",
    "b <lab_name>, a <dataset_type>",
    "c <lab_name>, a <dataset_type>",
]
negative_patterns = ["n0", "n1"]
"#,
        );
        let t = load_templates(&path).unwrap();
        assert_eq!(t.context_patterns().len(), 3);
        assert!(t.context_patterns()[1].starts_with("b "));
        assert_eq!(t.negative_patterns(), ["n0", "n1"]);
    }

    #[test]
    fn absent_negative_patterns_use_the_defaults() {
        let (_dir, path) = write_file(
            r#"context_patterns = ["x <lab_name> <dataset_type>"]"#,
        );
        let t = load_templates(&path).unwrap();
        assert_eq!(
            t.negative_patterns(),
            PromptTemplate::default_template().negative_patterns()
        );
    }

    #[test]
    fn unknown_keys_are_named_in_the_error() {
        let (_dir, path) = write_file(
            r#"
context_patterns = ["x <lab_name> <dataset_type>"]
negativ_patterns = ["typo"]
"#,
        );
        let err = load_templates(&path).unwrap_err();
        assert!(err.to_string().contains("negativ_patterns"), "got: {err}");
    }

    #[test]
    fn missing_placeholder_fails_validation() {
        let (_dir, path) = write_file(r#"context_patterns = ["snowy <lab_name>"]"#);
        assert!(matches!(
            load_templates(&path).unwrap_err(),
            TemplateError::Invalid { .. }
        ));
    }

    #[test]
    fn missing_file_falls_back_only_when_allowed() {
        let missing = Path::new("/nonexistent/prompts.toml");
        let t = resolve_templates(Some(missing), true).unwrap();
        assert_eq!(t, PromptTemplate::default_template());
        assert!(matches!(
            resolve_templates(Some(missing), false),
            Err(TemplateError::NotFound { .. })
        ));
        assert!(matches!(
            resolve_templates(None, false),
            Err(TemplateError::NotConfigured)
        ));
        assert!(resolve_templates(None, true).is_ok());
    }

    #[test]
    fn rendered_templates_parse_back() {
        let (_dir, path) = write_file(&render_template(&PromptTemplate::default_template()));
        assert_eq!(load_templates(&path).unwrap(), PromptTemplate::default_template());
    }
}
