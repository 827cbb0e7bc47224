//! Static checks over a parsed pack.
//!
//! | code | fault |
//! |------|-------|
//! | E0 | structural: duplicate ids, no manifests, no formality levels |
//! | E1 | action program: unknown op, wrong arity, bad argument types |
//! | E2 | manifest references an unknown anchor, catalog or action |
//! | E3 | catalog lacks a key the engine needs |
//! | E4 | two actions of a symbol group share a glyph |
//! | E5 | formality: missing or undeclared variant, placeholder mismatch |
//! | E6 | effect clause references an undeclared or mistyped slot |
//! | W1 | algebra op no action can reach |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::LocalePack;
use crate::algebra::OpName;
use crate::conversation::keys;
use crate::manifest::{placeholders, validate_symbol_group, SymbolGroupError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Code {
    E0,
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    W1,
}

impl Code {
    pub fn severity(self) -> Severity {
        match self {
            Code::W1 => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub code: Code,
    pub severity: Severity,
    /// Where in the pack the fault sits, e.g. `catalogs[0].entries.action.open`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.code, self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    fn push(&mut self, code: Code, path: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding { code, severity: code.severity(), path: path.into(), message: message.into() });
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    /// Distinct codes of error findings.
    pub fn error_codes(&self) -> BTreeSet<Code> {
        self.errors().map(|f| f.code).collect()
    }

    pub fn count(&self, code: Code) -> usize {
        self.findings.iter().filter(|f| f.code == code).count()
    }
}

fn duplicates<'a>(ids: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = BTreeSet::new();
    ids.into_iter().filter(|id| !seen.insert(*id)).collect()
}

/// Runs every static check. Findings are data; this never fails.
pub fn validate_pack(pack: &LocalePack) -> ValidationReport {
    let mut report = ValidationReport::default();
    let anchor = &pack.anchor;
    let levels: BTreeSet<&str> = pack.meta.formality.iter().map(String::as_str).collect();

    // E0
    if pack.manifests.is_empty() {
        report.push(Code::E0, "manifests", "a pack needs at least one manifest");
    }
    if levels.is_empty() {
        report.push(Code::E0, "meta.formality", "no formality level declared");
    }
    for dup in duplicates(pack.meta.formality.iter().map(String::as_str)) {
        report.push(Code::E0, "meta.formality", format!("level `{dup}` declared twice"));
    }
    for dup in duplicates(anchor.actions.iter().map(|a| a.id.as_str())) {
        report.push(Code::E0, "anchor.actions", format!("duplicate action id `{dup}`"));
    }
    for dup in duplicates(pack.manifests.iter().map(|m| m.id.as_str())) {
        report.push(Code::E0, "manifests", format!("duplicate manifest id `{dup}`"));
    }
    for dup in duplicates(pack.catalogs.iter().map(|c| c.id.as_str())) {
        report.push(Code::E0, "catalogs", format!("duplicate catalog id `{dup}`"));
    }
    for (i, action) in anchor.actions.iter().enumerate() {
        for dup in duplicates(action.slots.iter().map(|s| s.name.as_str())) {
            report.push(Code::E0, format!("anchor.actions[{i}].slots"), format!("duplicate slot `{dup}`"));
        }
    }

    // E1 and E6
    for (i, action) in anchor.actions.iter().enumerate() {
        if let Err(err) = action.program.check(&|slot| action.slot_type(slot)) {
            report.push(Code::E1, format!("anchor.actions[{i}].program"), format!("`{}`: {err}", action.id));
        }
        for (j, clause) in action.effects.iter().enumerate() {
            for (slot, wanted) in clause.slot_uses() {
                let path = format!("anchor.actions[{i}].effects[{j}]");
                match action.slot_type(slot) {
                    None => report.push(Code::E6, path, format!("`{}`: undeclared slot `{slot}`", action.id)),
                    Some(found) if found != wanted => report.push(
                        Code::E6,
                        path,
                        format!("`{}`: slot `{slot}` is a {found}, used as a {wanted}", action.id),
                    ),
                    Some(_) => {}
                }
            }
        }
    }

    // E2, E4 and undeclared manifest formality (E5)
    for (i, manifest) in pack.manifests.iter().enumerate() {
        let path = format!("manifests[{i}]");
        if manifest.anchor != anchor.id {
            report.push(Code::E2, format!("{path}.anchor"), format!("unknown anchor `{}`", manifest.anchor));
        }
        if pack.catalog(&manifest.catalog).is_none() {
            report.push(Code::E2, format!("{path}.catalog"), format!("unknown catalog `{}`", manifest.catalog));
        }
        if !levels.contains(manifest.formality.as_str()) {
            report.push(
                Code::E5,
                format!("{path}.formality"),
                format!("formality `{}` is not declared", manifest.formality),
            );
        }
        for (g, group) in manifest.symbol_groups.iter().enumerate() {
            let Err(errors) = validate_symbol_group(group, anchor) else { continue };
            for err in errors {
                let code = match err {
                    SymbolGroupError::DuplicateGlyph { .. } => Code::E4,
                    SymbolGroupError::UnknownAction { .. } => Code::E2,
                };
                report.push(code, format!("{path}.symbol_groups[{g}]"), err.to_string());
            }
        }
    }

    // E3 and E5 over catalogs
    let mut required: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for (key, args) in keys::ALL {
        required.insert(key.to_owned(), args.iter().copied().collect());
    }
    for action in &anchor.actions {
        required.insert(action.label.clone(), BTreeSet::new());
    }
    for (c, catalog) in pack.catalogs.iter().enumerate() {
        for key in required.keys().filter(|k| !catalog.entries.contains_key(*k)) {
            report.push(Code::E3, format!("catalogs[{c}].entries"), format!("missing key `{key}`"));
        }
        for (key, variants) in &catalog.entries {
            let path = format!("catalogs[{c}].entries.{key}");
            for level in &levels {
                if !variants.contains_key(*level) {
                    report.push(Code::E5, path.clone(), format!("no `{level}` variant"));
                }
            }
            let mut shapes: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
            for (level, template) in variants {
                if !levels.contains(level.as_str()) {
                    report.push(Code::E5, path.clone(), format!("undeclared formality `{level}`"));
                }
                match placeholders(template) {
                    Ok(names) => {
                        shapes.insert(level, names);
                    }
                    Err(offset) => {
                        report.push(Code::E5, path.clone(), format!("`{level}` variant is malformed at byte {offset}"))
                    }
                }
            }
            let mut distinct = shapes.values().collect::<BTreeSet<_>>().into_iter();
            if let (Some(_), Some(_)) = (distinct.next(), distinct.next()) {
                report.push(Code::E5, path.clone(), "variants use different placeholders");
            }
            let allowed = if let Some(allowed) = required.get(key) {
                Some(allowed.clone())
            } else if key.starts_with("object.") || keys::ERRORS.contains(&key.as_str()) {
                // Optional translations of lexicon words and wire errors, rendered
                // without arguments.
                Some(BTreeSet::new())
            } else {
                None
            };
            if let Some(allowed) = allowed {
                let unknown: BTreeSet<&String> =
                    shapes.values().flatten().filter(|p| !allowed.contains(p.as_str())).collect();
                for name in unknown {
                    report.push(Code::E5, path.clone(), format!("placeholder `{name}` is never supplied"));
                }
            }
        }
    }

    // W1
    let reachable: BTreeSet<OpName> = anchor.actions.iter().flat_map(|a| a.program.op_names()).collect();
    for op in OpName::ALL {
        if !reachable.contains(&op) {
            report.push(Code::W1, "anchor.actions", format!("algebra op `{}` is unreachable from every action", op.as_str()));
        }
    }

    report.findings.sort();
    report
}
