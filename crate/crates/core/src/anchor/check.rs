//! Bounded exhaustive checking of anchor actions against the algebra.
//!
//! Every workspace with at most `max_nodes` nodes is enumerated (names drawn
//! from a two-word alphabet, at most two children per container). For each
//! state, focus, enabled action and canonical binding the action's program is
//! run and its effect clauses are evaluated. Anything that does not hold is a
//! counterexample.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{instantiate, AnchorAction, AnchorDefinition, AnchorError, EvalContext, SlotKind};
use crate::algebra::{
    run_program, AlgebraError, ArtifactKind, Bindings, Node, NodeBody, NodeId, ProgramError, Value,
    Workspace,
};

/// Names used both for enumerated nodes and for name-slot bindings.
pub const NAME_ALPHABET: [&str; 2] = ["n1", "n2"];
/// Content values tried for byte slots.
pub const CONTENT_ALPHABET: [&[u8]; 2] = [b"", b"\x2a"];
pub const DEFAULT_STATE_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub max_nodes: usize,
    pub binding_budget: usize,
    /// Upper bound on enumerated states.
    pub state_cap: usize,
}

impl CheckOptions {
    pub fn new(max_nodes: usize) -> Self {
        CheckOptions { max_nodes, binding_budget: 16, state_cap: DEFAULT_STATE_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("max_nodes must be at least 1")]
    MaxNodesTooSmall,
    #[error("enumeration exceeds the cap of {cap} states")]
    EnumerationBudgetExceeded { cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Counterexample {
    pub action: String,
    /// Canonical serialization of the state the action started from.
    pub state: String,
    pub focus: NodeId,
    pub binding: Bindings,
    /// The violated clause, or the rejection reported by the algebra.
    pub clause: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub anchor: String,
    pub states: usize,
    pub checks: u64,
    pub failures: Vec<Counterexample>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Container(Vec<Shape>),
    Artifact(ArtifactKind),
    Link,
}

impl Shape {
    fn size(&self) -> usize {
        match self {
            Shape::Container(children) => 1 + children.iter().map(Shape::size).sum::<usize>(),
            _ => 1,
        }
    }
}

fn trees(budget: usize) -> Vec<Shape> {
    if budget == 0 {
        return Vec::new();
    }
    let mut out: Vec<Shape> = ArtifactKind::ALL.into_iter().map(Shape::Artifact).collect();
    out.push(Shape::Link);
    out.extend(forests(budget - 1).into_iter().map(Shape::Container));
    out
}

fn forests(budget: usize) -> Vec<Vec<Shape>> {
    let mut out = vec![Vec::new()];
    for first in trees(budget) {
        let rest = budget - first.size();
        out.push(vec![first.clone()]);
        for second in trees(rest) {
            out.push(vec![first.clone(), second]);
        }
    }
    out
}

/// Lays a shape out with preorder ids and index-derived names; links get
/// `NodeId(u64::MAX)` as a placeholder target.
fn layout(children: &[Shape], parent: NodeId, nodes: &mut BTreeMap<NodeId, Node>, next: &mut u64) -> Vec<NodeId> {
    let mut ids = Vec::new();
    for (index, shape) in children.iter().enumerate() {
        let id = NodeId(*next);
        *next += 1;
        ids.push(id);
        let name = NAME_ALPHABET[index].to_owned();
        let body = match shape {
            Shape::Artifact(kind) => NodeBody::Artifact { kind: *kind, content: Vec::new() },
            Shape::Link => NodeBody::Link { target: NodeId(u64::MAX) },
            Shape::Container(_) => NodeBody::Container { children: Vec::new() },
        };
        nodes.insert(id, Node { id, name, parent: Some(parent), body });
        if let Shape::Container(grand) = shape {
            let listed = layout(grand, id, nodes, next);
            nodes.get_mut(&id).expect("just inserted").body = NodeBody::Container { children: listed };
        }
    }
    ids
}

/// All canonical workspaces with at most `max_nodes` nodes, sorted by their
/// serialization.
///
/// Canonical means ids are assigned in preorder and the i-th child of a
/// container carries the i-th alphabet name; any workspace over the alphabet
/// is a sibling-order-preserving renaming of exactly one listed state.
pub fn enumerate_workspaces(max_nodes: usize, state_cap: usize) -> Result<Vec<Workspace>, CheckError> {
    if max_nodes == 0 {
        return Err(CheckError::MaxNodesTooSmall);
    }
    let mut seen: BTreeMap<String, Workspace> = BTreeMap::new();
    for forest in forests(max_nodes - 1) {
        let root = NodeId(0);
        let mut nodes = BTreeMap::new();
        nodes.insert(
            root,
            Node { id: root, name: crate::algebra::ROOT_NAME.to_owned(), parent: None, body: NodeBody::Container { children: Vec::new() } },
        );
        let mut next = 1;
        let top = layout(&forest, root, &mut nodes, &mut next);
        nodes.get_mut(&root).expect("root").body = NodeBody::Container { children: top };

        let links: Vec<NodeId> =
            nodes.values().filter(|n| matches!(n.body, NodeBody::Link { .. })).map(|n| n.id).collect();
        let targets: Vec<NodeId> =
            nodes.values().filter(|n| !matches!(n.body, NodeBody::Link { .. })).map(|n| n.id).collect();

        // Every assignment of a non-link target to every link.
        let mut choice = vec![0usize; links.len()];
        loop {
            let mut assigned = nodes.clone();
            for (link, pick) in links.iter().zip(&choice) {
                assigned.get_mut(link).expect("link").body = NodeBody::Link { target: targets[*pick] };
            }
            let ws = Workspace::from_parts(root, assigned, next);
            debug_assert!(ws.audit().is_ok());
            seen.insert(ws.to_canonical_json(), ws);
            if seen.len() > state_cap {
                return Err(CheckError::EnumerationBudgetExceeded { cap: state_cap });
            }
            let mut carry = true;
            for slot in choice.iter_mut() {
                *slot += 1;
                if *slot < targets.len() {
                    carry = false;
                    break;
                }
                *slot = 0;
            }
            if carry {
                break;
            }
        }
    }
    Ok(seen.into_values().collect())
}

/// The canonical finite binding set for `action` on `ws`, truncated to
/// `budget` entries.
///
/// Names range over [`NAME_ALPHABET`], contents over [`CONTENT_ALPHABET`],
/// and node references over every node whose category the slot accepts.
pub fn canonical_bindings(action: &AnchorAction, ws: &Workspace, budget: usize) -> Vec<Bindings> {
    let domains: Vec<Vec<Value>> = action
        .slots
        .iter()
        .map(|slot| match slot.kind {
            SlotKind::Name => NAME_ALPHABET.iter().map(|n| Value::Name((*n).to_owned())).collect(),
            SlotKind::Bytes => CONTENT_ALPHABET.iter().map(|b| Value::Bytes(b.to_vec())).collect(),
            SlotKind::NodeRef => ws
                .nodes()
                .filter(|n| slot.accepts.is_none_or(|p| p.matches(n.category())))
                .map(|n| Value::Node(n.id))
                .collect(),
        })
        .collect();
    if domains.iter().any(Vec::is_empty) {
        return Vec::new();
    }

    let mut out = Vec::new();
    let mut index = vec![0usize; domains.len()];
    while out.len() < budget {
        out.push(
            action
                .slots
                .iter()
                .zip(&domains)
                .zip(&index)
                .map(|((slot, domain), i)| (slot.name.clone(), domain[*i].clone()))
                .collect(),
        );
        // Odometer over the domains, last slot fastest.
        let mut done = true;
        for pos in (0..domains.len()).rev() {
            index[pos] += 1;
            if index[pos] < domains[pos].len() {
                done = false;
                break;
            }
            index[pos] = 0;
        }
        if done {
            break;
        }
    }
    out
}

/// Rejections that depend only on the bound values (a name that is already
/// taken, a destination inside the moved subtree). The conversation reports
/// them as a failed resolution; they say nothing about the metaphor.
fn excused(err: &ProgramError) -> bool {
    matches!(
        err,
        ProgramError::Step {
            source: AlgebraError::DuplicateName { .. } | AlgebraError::EmptyName | AlgebraError::CycleForbidden { .. },
            ..
        }
    )
}

fn check_one(
    action: &AnchorAction,
    ws: &Workspace,
    state: &str,
    focus: NodeId,
    binding: &Bindings,
    failures: &mut BTreeSet<Counterexample>,
) {
    let mut fail = |clause: String| {
        failures.insert(Counterexample {
            action: action.id.clone(),
            state: state.to_owned(),
            focus,
            binding: binding.clone(),
            clause,
        });
    };
    let program = match instantiate(action, binding, ws, focus) {
        Ok(p) => p,
        Err(AnchorError::NoParent(_)) => {
            fail("instantiation failed: the focus has no parent".to_owned());
            return;
        }
        Err(e) => {
            fail(format!("instantiation failed: {e}"));
            return;
        }
    };
    match run_program(ws, &program, binding) {
        Ok(post) => {
            let ctx = EvalContext { pre: ws, post: &post, focus, bindings: binding };
            for clause in &action.effects {
                if !clause.holds(&ctx) {
                    fail(clause.to_string());
                }
            }
        }
        Err(e) if excused(&e) => {}
        Err(e) => fail(format!("program rejected: {e}")),
    }
}

/// Runs every enabled action of `anchor` on every enumerated state.
///
/// Failures are reported sorted, so the result is independent of
/// enumeration order.
pub fn check_homomorphism(anchor: &AnchorDefinition, options: CheckOptions) -> Result<CheckReport, CheckError> {
    let states = enumerate_workspaces(options.max_nodes, options.state_cap)?;
    let mut checks = 0u64;
    let mut failures = BTreeSet::new();
    if !anchor.actions.is_empty() {
        for ws in &states {
            let state = ws.to_canonical_json();
            let foci: Vec<NodeId> = ws.nodes().map(|n| n.id).collect();
            for focus in foci {
                for action in anchor.enabled_actions(ws, focus).expect("focus drawn from the state") {
                    for binding in canonical_bindings(action, ws, options.binding_budget) {
                        checks += 1;
                        check_one(action, ws, &state, focus, &binding, &mut failures);
                    }
                }
            }
        }
    }
    Ok(CheckReport {
        anchor: anchor.id.clone(),
        states: states.len(),
        checks,
        failures: failures.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::NodeCategory;

    #[test]
    fn one_node_is_the_empty_root() {
        let states = enumerate_workspaces(1, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(states, vec![Workspace::new()]);
    }

    #[test]
    fn two_nodes() {
        let states = enumerate_workspaces(2, DEFAULT_STATE_CAP).unwrap();
        // Empty root, plus one child: a container, four artifact kinds, or a link to the root.
        assert_eq!(states.len(), 7);
        let non_link_pairs = states
            .iter()
            .filter(|ws| ws.len() == 2 && ws.count(|c| c == NodeCategory::Link) == 0)
            .count();
        assert_eq!(non_link_pairs, 5);
    }

    #[test]
    fn zero_nodes_and_cap() {
        assert_eq!(enumerate_workspaces(0, 10).unwrap_err(), CheckError::MaxNodesTooSmall);
        assert_eq!(
            enumerate_workspaces(3, 5).unwrap_err(),
            CheckError::EnumerationBudgetExceeded { cap: 5 }
        );
    }

    #[test]
    fn states_are_distinct_and_valid() {
        let states = enumerate_workspaces(4, DEFAULT_STATE_CAP).unwrap();
        let serials: BTreeSet<String> = states.iter().map(Workspace::to_canonical_json).collect();
        assert_eq!(serials.len(), states.len());
        for ws in &states {
            ws.audit().unwrap();
            assert!(ws.len() <= 4);
        }
    }

    #[test]
    fn zero_action_anchor_passes_vacuously() {
        let anchor = AnchorDefinition { id: "bare".into(), metaphor: "none".into(), lexicon: BTreeMap::new(), actions: vec![] };
        let report = check_homomorphism(&anchor, CheckOptions::new(3)).unwrap();
        assert!(report.passed());
        assert_eq!(report.checks, 0);
    }
}
