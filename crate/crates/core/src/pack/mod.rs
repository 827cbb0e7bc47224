//! Locale packs: one anchor, the manifests over it and their message
//! catalogs, shipped as a single JSON document.

mod validate;

use std::num::NonZeroU32;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anchor::AnchorDefinition;
use crate::manifest::{ManifestConfig, MessageCatalog};

pub use validate::{validate_pack, Code, Finding, Severity, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackMeta {
    pub id: String,
    pub locale: String,
    pub version: NonZeroU32,
    /// Declared formality levels, e.g. `["tu", "vous"]`.
    pub formality: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalePack {
    pub meta: PackMeta,
    pub anchor: AnchorDefinition,
    pub manifests: Vec<ManifestConfig>,
    pub catalogs: Vec<MessageCatalog>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    SyntaxError { line: usize, column: usize, message: String },
    #[error("schema error at `{path}`: {message}")]
    SchemaError { path: String, message: String },
    #[error("unknown field at `{path}`")]
    UnknownField { path: String },
}

impl LocalePack {
    pub fn manifest(&self, id: &str) -> Option<&ManifestConfig> {
        self.manifests.iter().find(|m| m.id == id)
    }

    pub fn catalog(&self, id: &str) -> Option<&MessageCatalog> {
        self.catalogs.iter().find(|c| c.id == id)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_pack(self)
    }
}

/// Parses a pack strictly: unknown fields anywhere are rejected.
pub fn parse_pack(doc: &[u8]) -> Result<LocalePack, PackError> {
    let mut de = serde_json::Deserializer::from_slice(doc);
    let pack: LocalePack = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        classify(inner, path)
    })?;
    de.end().map_err(|e| classify(e, String::from(".")))?;
    Ok(pack)
}

fn classify(err: serde_json::Error, path: String) -> PackError {
    use serde_json::error::Category;
    match err.classify() {
        Category::Syntax | Category::Eof | Category::Io => {
            PackError::SyntaxError { line: err.line(), column: err.column(), message: strip_location(&err) }
        }
        Category::Data => {
            let message = strip_location(&err);
            if message.starts_with("unknown field") {
                PackError::UnknownField { path }
            } else {
                PackError::SchemaError { path, message }
            }
        }
    }
}

fn strip_location(err: &serde_json::Error) -> String {
    let text = err.to_string();
    match text.rfind(" at line ") {
        Some(at) => text[..at].to_owned(),
        None => text,
    }
}

/// Canonical text of a pack: sorted keys, two-space indentation and a
/// trailing newline.
pub fn serialize_pack(pack: &LocalePack) -> String {
    let value = serde_json::to_value(pack).expect("packs serialize");
    let mut out = serde_json::to_string_pretty(&value).expect("values serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn bundled_packs_round_trip() {
        for (name, text) in bundled::SOURCES {
            let first = parse_pack(text.as_bytes()).unwrap_or_else(|e| panic!("{name}: {e}"));
            let canonical = serialize_pack(&first);
            let second = parse_pack(canonical.as_bytes()).unwrap();
            assert_eq!(first, second, "{name}");
            assert_eq!(serialize_pack(&second), canonical, "{name}");
        }
    }

    #[test]
    fn misspelled_field_is_reported_with_its_path() {
        let text = bundled::SOURCES[0].1.replacen("\"metaphor\"", "\"metafor\"", 1);
        assert_eq!(parse_pack(text.as_bytes()).unwrap_err(), PackError::UnknownField { path: "anchor.metafor".into() });
        let text = bundled::SOURCES[0].1.replacen("\"direction\": \"ltr\"", "\"direction\": \"ltr\", \"colour\": 1", 1);
        assert_eq!(
            parse_pack(text.as_bytes()).unwrap_err(),
            PackError::UnknownField { path: "manifests[0].colour".into() }
        );
    }

    #[test]
    fn truncated_and_mistyped_documents() {
        let text = bundled::SOURCES[0].1;
        let truncated = &text[..text.len() / 2];
        assert!(matches!(parse_pack(truncated.as_bytes()), Err(PackError::SyntaxError { .. })));
        let trailing = format!("{text} trailing");
        assert!(matches!(parse_pack(trailing.as_bytes()), Err(PackError::SyntaxError { .. })));
        let zero = text.replacen("\"version\": 1", "\"version\": 0", 1);
        assert!(matches!(
            parse_pack(zero.as_bytes()),
            Err(PackError::SchemaError { path, .. }) if path == "meta.version"
        ));
    }
}
