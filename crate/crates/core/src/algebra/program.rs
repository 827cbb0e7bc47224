//! Algebra programs: ordered lists of catalog operations with argument
//! expressions, executed atomically against a workspace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AlgebraError, ArtifactKind, NodeId, Workspace};

/// The published operation catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpName {
    CreateArtifact,
    MakeContainer,
    WriteContent,
    ReadContent,
    MoveNode,
    DissolveContainer,
    DeleteNode,
    MakeLink,
    ListChildren,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamType {
    Node,
    Name,
    Kind,
    Bytes,
}

impl fmt::Display for ParamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamType::Node => "node",
            ParamType::Name => "name",
            ParamType::Kind => "kind",
            ParamType::Bytes => "bytes",
        })
    }
}

impl OpName {
    pub const ALL: [OpName; 9] = [
        OpName::CreateArtifact,
        OpName::MakeContainer,
        OpName::WriteContent,
        OpName::ReadContent,
        OpName::MoveNode,
        OpName::DissolveContainer,
        OpName::DeleteNode,
        OpName::MakeLink,
        OpName::ListChildren,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OpName::CreateArtifact => "create_artifact",
            OpName::MakeContainer => "make_container",
            OpName::WriteContent => "write_content",
            OpName::ReadContent => "read_content",
            OpName::MoveNode => "move_node",
            OpName::DissolveContainer => "dissolve_container",
            OpName::DeleteNode => "delete_node",
            OpName::MakeLink => "make_link",
            OpName::ListChildren => "list_children",
        }
    }

    /// Named parameters, in canonical order.
    pub fn signature(self) -> &'static [(&'static str, ParamType)] {
        use ParamType::*;
        match self {
            OpName::CreateArtifact => &[("parent", Node), ("kind", Kind), ("name", Name)],
            OpName::MakeContainer => &[("parent", Node), ("name", Name)],
            OpName::WriteContent => &[("id", Node), ("content", Bytes)],
            OpName::ReadContent => &[("id", Node)],
            OpName::MoveNode => &[("id", Node), ("dest", Node)],
            OpName::DissolveContainer => &[("id", Node)],
            OpName::DeleteNode => &[("id", Node)],
            OpName::MakeLink => &[("target", Node), ("parent", Node), ("name", Name)],
            OpName::ListChildren => &[("id", Node)],
        }
    }

    /// Whether the step produces a node that later steps may refer to.
    pub fn yields_node(self) -> bool {
        matches!(self, OpName::CreateArtifact | OpName::MakeContainer | OpName::MakeLink)
    }
}

impl fmt::Display for OpName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OpName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OpName::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| format!("unknown algebra operation `{s}`"))
    }
}

/// An argument expression.
///
/// `focus`, `focus_parent` and `slot` appear only in templates; a ground
/// program holds literals and `step` back-references.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arg {
    Focus,
    FocusParent,
    Slot(String),
    /// Node produced by an earlier step of the same program.
    Step(usize),
    Node(NodeId),
    Name(String),
    Kind(ArtifactKind),
    Bytes(#[serde(with = "crate::b64")] Vec<u8>),
}

/// A value bound to a slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Name(String),
    Node(NodeId),
    Bytes(#[serde(with = "crate::b64")] Vec<u8>),
}

impl Value {
    pub fn param_type(&self) -> ParamType {
        match self {
            Value::Name(_) => ParamType::Name,
            Value::Node(_) => ParamType::Node,
            Value::Bytes(_) => ParamType::Bytes,
        }
    }

    pub fn into_arg(self) -> Arg {
        match self {
            Value::Name(n) => Arg::Name(n),
            Value::Node(id) => Arg::Node(id),
            Value::Bytes(b) => Arg::Bytes(b),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Name(n) => write!(f, "{n:?}"),
            Value::Node(id) => write!(f, "{id}"),
            Value::Bytes(b) => write!(f, "<{} bytes>", b.len()),
        }
    }
}

pub type Bindings = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    /// Kept as text so that packs naming unknown operations still load and
    /// can be reported by validation.
    pub op: String,
    #[serde(default)]
    pub args: BTreeMap<String, Arg>,
}

impl Step {
    pub fn new(op: OpName, args: impl IntoIterator<Item = (&'static str, Arg)>) -> Self {
        Step {
            op: op.as_str().to_owned(),
            args: args.into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraProgram {
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("step {step}: unknown operation `{op}`")]
    UnknownOp { step: usize, op: String },
    #[error("step {step}: missing argument `{param}`")]
    MissingArg { step: usize, param: String },
    #[error("step {step}: unexpected argument `{param}`")]
    UnexpectedArg { step: usize, param: String },
    #[error("step {step}: argument `{param}` must be a {expected}")]
    ArgType { step: usize, param: String, expected: ParamType },
    #[error("step {step}: reference to step {referenced}, which yields no node")]
    BadStepRef { step: usize, referenced: usize },
    #[error("step {step}: slot `{slot}` is not declared")]
    UndeclaredSlot { step: usize, slot: String },
    #[error("slot `{0}` is unbound")]
    UnboundSlot(String),
    #[error("step {step}: argument `{param}` still refers to the focus")]
    Unground { step: usize, param: String },
    #[error("step {index}: {source}")]
    Step { index: usize, source: AlgebraError },
}

impl AlgebraProgram {
    pub fn new(steps: Vec<Step>) -> Self {
        AlgebraProgram { steps }
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Catalog operations named by the program; unknown names are skipped.
    pub fn op_names(&self) -> BTreeSet<OpName> {
        self.steps.iter().filter_map(|s| s.op.parse().ok()).collect()
    }

    /// Literal node ids appearing anywhere in the program.
    pub fn node_literals(&self) -> BTreeSet<NodeId> {
        self.steps
            .iter()
            .flat_map(|s| s.args.values())
            .filter_map(|a| match a {
                Arg::Node(id) => Some(*id),
                _ => None,
            })
            .collect()
    }

    /// Static check: known operations, exact arity, argument types, and
    /// back-references. `slot_type` reports the declared type of a slot, or
    /// `None` for undeclared slots.
    pub fn check(&self, slot_type: &dyn Fn(&str) -> Option<ParamType>) -> Result<(), ProgramError> {
        for (index, step) in self.steps.iter().enumerate() {
            let op = parse_op(index, &step.op)?;
            check_arity(index, op, step)?;
            for (param, expected) in op.signature() {
                let arg = &step.args[*param];
                let actual = match arg {
                    Arg::Focus | Arg::FocusParent | Arg::Node(_) => ParamType::Node,
                    Arg::Step(referenced) => {
                        let yields = *referenced < index
                            && self.steps[*referenced]
                                .op
                                .parse::<OpName>()
                                .is_ok_and(OpName::yields_node);
                        if !yields {
                            return Err(ProgramError::BadStepRef { step: index, referenced: *referenced });
                        }
                        ParamType::Node
                    }
                    Arg::Name(_) => ParamType::Name,
                    Arg::Kind(_) => ParamType::Kind,
                    Arg::Bytes(_) => ParamType::Bytes,
                    Arg::Slot(slot) => slot_type(slot).ok_or_else(|| ProgramError::UndeclaredSlot {
                        step: index,
                        slot: slot.clone(),
                    })?,
                };
                if actual != *expected {
                    return Err(ProgramError::ArgType {
                        step: index,
                        param: (*param).to_owned(),
                        expected: *expected,
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for AlgebraProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, step) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}(", step.op)?;
            // Signature order when the op is known, otherwise alphabetical.
            let mut args: Vec<(&String, &Arg)> = step.args.iter().collect();
            if let Ok(op) = step.op.parse::<OpName>() {
                let rank = |p: &str| op.signature().iter().position(|(n, _)| *n == p).unwrap_or(usize::MAX);
                args.sort_by_key(|(p, _)| rank(p));
            }
            for (j, (param, arg)) in args.into_iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{param}=")?;
                match arg {
                    Arg::Focus => f.write_str("focus")?,
                    Arg::FocusParent => f.write_str("focus.parent")?,
                    Arg::Slot(s) => write!(f, "${s}")?,
                    Arg::Step(n) => write!(f, "step{n}")?,
                    Arg::Node(id) => write!(f, "{id}")?,
                    Arg::Name(n) => write!(f, "{n:?}")?,
                    Arg::Kind(k) => f.write_str(k.as_str())?,
                    Arg::Bytes(b) => write!(f, "<{} bytes>", b.len())?,
                }
            }
            f.write_str(")")?;
        }
        f.write_str("]")
    }
}

fn parse_op(step: usize, op: &str) -> Result<OpName, ProgramError> {
    op.parse().map_err(|_| ProgramError::UnknownOp { step, op: op.to_owned() })
}

fn check_arity(index: usize, op: OpName, step: &Step) -> Result<(), ProgramError> {
    let signature = op.signature();
    if let Some((param, _)) = signature.iter().find(|(p, _)| !step.args.contains_key(*p)) {
        return Err(ProgramError::MissingArg { step: index, param: (*param).to_owned() });
    }
    if let Some(extra) = step.args.keys().find(|k| !signature.iter().any(|(p, _)| p == k)) {
        return Err(ProgramError::UnexpectedArg { step: index, param: extra.clone() });
    }
    Ok(())
}

enum Resolved {
    Node(NodeId),
    Name(String),
    Kind(ArtifactKind),
    Bytes(Vec<u8>),
}

struct StepArgs {
    index: usize,
    values: BTreeMap<&'static str, Resolved>,
}

impl StepArgs {
    fn node(&self, param: &str) -> Result<NodeId, ProgramError> {
        match self.values.get(param) {
            Some(Resolved::Node(id)) => Ok(*id),
            _ => Err(self.type_error(param, ParamType::Node)),
        }
    }

    fn name(&self, param: &str) -> Result<&str, ProgramError> {
        match self.values.get(param) {
            Some(Resolved::Name(n)) => Ok(n),
            _ => Err(self.type_error(param, ParamType::Name)),
        }
    }

    fn kind(&self, param: &str) -> Result<ArtifactKind, ProgramError> {
        match self.values.get(param) {
            Some(Resolved::Kind(k)) => Ok(*k),
            _ => Err(self.type_error(param, ParamType::Kind)),
        }
    }

    fn bytes(&self, param: &str) -> Result<&[u8], ProgramError> {
        match self.values.get(param) {
            Some(Resolved::Bytes(b)) => Ok(b),
            _ => Err(self.type_error(param, ParamType::Bytes)),
        }
    }

    fn type_error(&self, param: &str, expected: ParamType) -> ProgramError {
        ProgramError::ArgType { step: self.index, param: param.to_owned(), expected }
    }
}

/// Runs `program` step by step on a copy of `ws`.
///
/// Either every step succeeds and the final workspace is returned, or the
/// first failure is reported and the caller's workspace is left as it was.
pub fn run_program(
    ws: &Workspace,
    program: &AlgebraProgram,
    bindings: &Bindings,
) -> Result<Workspace, ProgramError> {
    let mut current = ws.clone();
    let mut produced: Vec<Option<NodeId>> = Vec::with_capacity(program.steps.len());
    for (index, step) in program.steps.iter().enumerate() {
        let op = parse_op(index, &step.op)?;
        check_arity(index, op, step)?;
        let mut values = BTreeMap::new();
        for (param, _) in op.signature() {
            let resolved = match &step.args[*param] {
                Arg::Focus | Arg::FocusParent => {
                    return Err(ProgramError::Unground { step: index, param: (*param).to_owned() })
                }
                Arg::Slot(slot) => match bindings.get(slot) {
                    Some(value) => resolve_value(value.clone()),
                    None => return Err(ProgramError::UnboundSlot(slot.clone())),
                },
                Arg::Step(referenced) => match produced.get(*referenced).copied().flatten() {
                    Some(id) => Resolved::Node(id),
                    None => {
                        return Err(ProgramError::BadStepRef { step: index, referenced: *referenced })
                    }
                },
                Arg::Node(id) => Resolved::Node(*id),
                Arg::Name(n) => Resolved::Name(n.clone()),
                Arg::Kind(k) => Resolved::Kind(*k),
                Arg::Bytes(b) => Resolved::Bytes(b.clone()),
            };
            values.insert(*param, resolved);
        }
        let args = StepArgs { index, values };
        let wrap = |source| ProgramError::Step { index, source };
        let (next, output) = match op {
            OpName::CreateArtifact => {
                let (ws, id) = current
                    .create_artifact(args.node("parent")?, args.kind("kind")?, args.name("name")?)
                    .map_err(wrap)?;
                (ws, Some(id))
            }
            OpName::MakeContainer => {
                let (ws, id) = current
                    .make_container(args.node("parent")?, args.name("name")?)
                    .map_err(wrap)?;
                (ws, Some(id))
            }
            OpName::MakeLink => {
                let (ws, id) = current
                    .make_link(args.node("target")?, args.node("parent")?, args.name("name")?)
                    .map_err(wrap)?;
                (ws, Some(id))
            }
            OpName::WriteContent => (
                current.write_content(args.node("id")?, args.bytes("content")?).map_err(wrap)?,
                None,
            ),
            OpName::ReadContent => {
                current.read_content(args.node("id")?).map_err(wrap)?;
                (current, None)
            }
            OpName::ListChildren => {
                current.list_children(args.node("id")?).map_err(wrap)?;
                (current, None)
            }
            OpName::MoveNode => (
                current.move_node(args.node("id")?, args.node("dest")?).map_err(wrap)?,
                None,
            ),
            OpName::DissolveContainer => {
                (current.dissolve_container(args.node("id")?).map_err(wrap)?, None)
            }
            OpName::DeleteNode => (current.delete_node(args.node("id")?).map_err(wrap)?, None),
        };
        current = next;
        produced.push(output);
    }
    Ok(current)
}

fn resolve_value(value: Value) -> Resolved {
    match value {
        Value::Name(n) => Resolved::Name(n),
        Value::Node(id) => Resolved::Node(id),
        Value::Bytes(b) => Resolved::Bytes(b),
    }
}
