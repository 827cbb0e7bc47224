//! Message catalogs with formality variants.
//!
//! Templates use `{name}` placeholders; `{{` and `}}` stand for literal
//! braces.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessageCatalog {
    pub id: String,
    /// key → formality level → template.
    pub entries: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MessageError {
    #[error("unknown message key `{0}`")]
    UnknownKey(String),
    #[error("message `{key}` has no `{formality}` variant")]
    UnknownFormality { key: String, formality: String },
    #[error("message `{key}` needs argument `{arg}`")]
    MissingArg { key: String, arg: String },
    #[error("message `{key}` is malformed at byte {offset}")]
    Malformed { key: String, offset: usize },
}

enum Piece<'a> {
    Text(&'a str),
    Placeholder(&'a str),
}

fn parse(template: &str) -> Result<Vec<Piece<'_>>, usize> {
    let mut pieces = Vec::new();
    let bytes = template.as_bytes();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' if bytes.get(i + 1) == Some(&b'{') => {
                pieces.push(Piece::Text(&template[start..=i]));
                i += 2;
                start = i;
            }
            b'}' if bytes.get(i + 1) == Some(&b'}') => {
                pieces.push(Piece::Text(&template[start..=i]));
                i += 2;
                start = i;
            }
            b'{' => {
                pieces.push(Piece::Text(&template[start..i]));
                let close = template[i..].find('}').ok_or(i)? + i;
                let name = &template[i + 1..close];
                if name.is_empty() || name.contains('{') {
                    return Err(i);
                }
                pieces.push(Piece::Placeholder(name));
                i = close + 1;
                start = i;
            }
            b'}' => return Err(i),
            _ => i += 1,
        }
    }
    pieces.push(Piece::Text(&template[start..]));
    Ok(pieces)
}

/// Placeholder names used by `template`, or the byte offset of a syntax error.
pub fn placeholders(template: &str) -> Result<BTreeSet<String>, usize> {
    Ok(parse(template)?
        .into_iter()
        .filter_map(|p| match p {
            Piece::Placeholder(name) => Some(name.to_owned()),
            Piece::Text(_) => None,
        })
        .collect())
}

impl MessageCatalog {
    pub fn template(&self, key: &str, formality: &str) -> Result<&str, MessageError> {
        let variants = self.entries.get(key).ok_or_else(|| MessageError::UnknownKey(key.to_owned()))?;
        variants.get(formality).map(String::as_str).ok_or_else(|| MessageError::UnknownFormality {
            key: key.to_owned(),
            formality: formality.to_owned(),
        })
    }
}

/// Looks up `key` at `formality` and substitutes `args` into it.
/// Arguments the template does not use are ignored.
pub fn resolve_message(
    catalog: &MessageCatalog,
    key: &str,
    formality: &str,
    args: &BTreeMap<String, String>,
) -> Result<String, MessageError> {
    let template = catalog.template(key, formality)?;
    let pieces = parse(template).map_err(|offset| MessageError::Malformed { key: key.to_owned(), offset })?;
    let mut out = String::with_capacity(template.len());
    for piece in pieces {
        match piece {
            Piece::Text(text) => out.push_str(text),
            Piece::Placeholder(name) => match args.get(name) {
                Some(value) => out.push_str(value),
                None => return Err(MessageError::MissingArg { key: key.to_owned(), arg: name.to_owned() }),
            },
        }
    }
    Ok(out)
}
