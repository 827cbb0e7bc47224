//! Anchor systems: the metaphors an interface rests on.
//!
//! An [`AnchorDefinition`] names the metaphorical objects (its lexicon) and
//! the metaphorical actions a user can perform. Each action compiles to an
//! [`AlgebraProgram`] and declares, through [`EffectClause`]s, what it means
//! at the level of the metaphor. [`check_homomorphism`] verifies the two
//! agree on every small workspace.

mod check;
mod effect;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    AlgebraError, AlgebraProgram, Arg, ArtifactKind, Bindings, NodeCategory, NodeId, ParamType,
    Step, Value, Workspace,
};

pub use check::{
    canonical_bindings, check_homomorphism, enumerate_workspaces, CheckError, CheckOptions,
    CheckReport, Counterexample, DEFAULT_STATE_CAP,
};
pub use effect::{BytesExpr, EffectClause, EvalContext, NameExpr, NodeExpr};

/// A set of node categories, written `any`, `container`, `link`,
/// `artifact`, or `artifact:<kind>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CategoryPattern {
    Any,
    Container,
    Link,
    Artifact(Option<ArtifactKind>),
}

impl CategoryPattern {
    pub fn matches(self, category: NodeCategory) -> bool {
        match (self, category) {
            (CategoryPattern::Any, _) => true,
            (CategoryPattern::Container, NodeCategory::Container) => true,
            (CategoryPattern::Link, NodeCategory::Link) => true,
            (CategoryPattern::Artifact(None), NodeCategory::Artifact(_)) => true,
            (CategoryPattern::Artifact(Some(want)), NodeCategory::Artifact(kind)) => want == kind,
            _ => false,
        }
    }

    /// Higher is narrower; used to pick the most precise lexicon entry.
    fn specificity(self) -> u8 {
        match self {
            CategoryPattern::Any => 0,
            CategoryPattern::Artifact(None) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for CategoryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CategoryPattern::Any => f.write_str("any"),
            CategoryPattern::Container => f.write_str("container"),
            CategoryPattern::Link => f.write_str("link"),
            CategoryPattern::Artifact(None) => f.write_str("artifact"),
            CategoryPattern::Artifact(Some(kind)) => write!(f, "artifact:{}", kind.as_str()),
        }
    }
}

impl FromStr for CategoryPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" => Ok(CategoryPattern::Any),
            "container" => Ok(CategoryPattern::Container),
            "link" => Ok(CategoryPattern::Link),
            "artifact" => Ok(CategoryPattern::Artifact(None)),
            other => match other.strip_prefix("artifact:") {
                Some(kind) => Ok(CategoryPattern::Artifact(Some(kind.parse()?))),
                None => Err(format!("unknown node category `{other}`")),
            },
        }
    }
}

impl TryFrom<String> for CategoryPattern {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<CategoryPattern> for String {
    fn from(p: CategoryPattern) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootRule {
    #[default]
    Any,
    RootOnly,
    NonRoot,
}

/// Where an action may be offered: a predicate over the focus category and
/// whether the focus is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Applicability {
    pub on: Vec<CategoryPattern>,
    #[serde(default)]
    pub root: RootRule,
}

impl Applicability {
    pub fn holds(&self, category: NodeCategory, is_root: bool) -> bool {
        let root_ok = match self.root {
            RootRule::Any => true,
            RootRule::RootOnly => is_root,
            RootRule::NonRoot => !is_root,
        };
        root_ok && self.on.iter().any(|p| p.matches(category))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Name,
    NodeRef,
    Bytes,
}

impl SlotKind {
    pub fn param_type(self) -> ParamType {
        match self {
            SlotKind::Name => ParamType::Name,
            SlotKind::NodeRef => ParamType::Node,
            SlotKind::Bytes => ParamType::Bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotSpec {
    pub name: String,
    pub kind: SlotKind,
    /// For node references: which categories the referenced node may have.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepts: Option<CategoryPattern>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorAction {
    pub id: String,
    /// Message-catalog key of the action's label.
    pub label: String,
    pub applies: Applicability,
    #[serde(default)]
    pub slots: Vec<SlotSpec>,
    pub program: AlgebraProgram,
    #[serde(default)]
    pub effects: Vec<EffectClause>,
}

impl AnchorAction {
    pub fn slot(&self, name: &str) -> Option<&SlotSpec> {
        self.slots.iter().find(|s| s.name == name)
    }

    pub fn slot_type(&self, name: &str) -> Option<ParamType> {
        self.slot(name).map(|s| s.kind.param_type())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorDefinition {
    pub id: String,
    pub metaphor: String,
    /// Metaphorical object name → node categories it stands for.
    pub lexicon: BTreeMap<String, CategoryPattern>,
    #[serde(default)]
    pub actions: Vec<AnchorAction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnchorError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("slot `{0}` is unbound")]
    UnboundSlot(String),
    #[error("slot `{slot}` expects a {expected}")]
    SlotKindMismatch { slot: String, expected: String },
    #[error("binding for undeclared slot `{0}`")]
    UnknownSlot(String),
    #[error("the focus {0} has no parent")]
    NoParent(NodeId),
}

impl AnchorDefinition {
    pub fn action(&self, id: &str) -> Option<&AnchorAction> {
        self.actions.iter().find(|a| a.id == id)
    }

    /// Actions whose applicability holds at `focus`, in definition order.
    pub fn enabled_actions(
        &self,
        ws: &Workspace,
        focus: NodeId,
    ) -> Result<Vec<&AnchorAction>, AlgebraError> {
        let category = ws.category(focus)?;
        let is_root = focus == ws.root();
        Ok(self.actions.iter().filter(|a| a.applies.holds(category, is_root)).collect())
    }

    /// Lexicon word for a node category, choosing the narrowest matching
    /// entry; ties go to the alphabetically first word.
    pub fn object_for(&self, category: NodeCategory) -> Option<&str> {
        self.lexicon
            .iter()
            .filter(|(_, p)| p.matches(category))
            .max_by(|(wa, pa), (wb, pb)| pa.specificity().cmp(&pb.specificity()).then(wb.cmp(wa)))
            .map(|(word, _)| word.as_str())
    }

    /// Whether every node category present in `ws` has a lexicon word.
    pub fn covers(&self, ws: &Workspace) -> bool {
        self.uncovered(ws).is_empty()
    }

    pub fn uncovered(&self, ws: &Workspace) -> Vec<NodeCategory> {
        let mut missing: Vec<NodeCategory> = ws
            .nodes()
            .map(|n| n.category())
            .filter(|c| self.object_for(*c).is_none())
            .collect();
        missing.sort();
        missing.dedup();
        missing
    }
}

/// Grounds an action's program template at `focus` with `bindings`.
pub fn instantiate(
    action: &AnchorAction,
    bindings: &Bindings,
    ws: &Workspace,
    focus: NodeId,
) -> Result<AlgebraProgram, AnchorError> {
    ws.node(focus)?;
    if let Some(extra) = bindings.keys().find(|k| action.slot(k).is_none()) {
        return Err(AnchorError::UnknownSlot(extra.clone()));
    }
    for slot in &action.slots {
        let value = bindings.get(&slot.name).ok_or_else(|| AnchorError::UnboundSlot(slot.name.clone()))?;
        let mismatch = || AnchorError::SlotKindMismatch {
            slot: slot.name.clone(),
            expected: match slot.accepts {
                Some(p) => format!("{} of category {p}", slot.kind.param_type()),
                None => slot.kind.param_type().to_string(),
            },
        };
        if value.param_type() != slot.kind.param_type() {
            return Err(mismatch());
        }
        if let (Value::Node(id), Some(pattern)) = (value, slot.accepts) {
            if !pattern.matches(ws.category(*id)?) {
                return Err(mismatch());
            }
        } else if let Value::Node(id) = value {
            ws.node(*id)?;
        }
    }

    let parent = ws.parent_of(focus)?;
    let mut steps = Vec::with_capacity(action.program.steps.len());
    for step in &action.program.steps {
        let mut args = BTreeMap::new();
        for (param, arg) in &step.args {
            let ground = match arg {
                Arg::Focus => Arg::Node(focus),
                Arg::FocusParent => Arg::Node(parent.ok_or(AnchorError::NoParent(focus))?),
                Arg::Slot(name) => bindings
                    .get(name)
                    .cloned()
                    .ok_or_else(|| AnchorError::UnboundSlot(name.clone()))?
                    .into_arg(),
                other => other.clone(),
            };
            args.insert(param.clone(), ground);
        }
        steps.push(Step { op: step.op.clone(), args });
    }
    Ok(AlgebraProgram::new(steps))
}
