//! Declared postconditions of anchor actions.
//!
//! A clause is evaluated against the workspace before and after an action's
//! program ran. Node expressions name nodes by id, so `focus` still denotes
//! the same node after it has been deleted; `child` looks names up in the
//! resulting workspace.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::CategoryPattern;
use crate::algebra::{Bindings, NodeBody, NodeId, ParamType, Value, Workspace};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeExpr {
    Focus,
    FocusParent,
    Slot(String),
    Child { of: Box<NodeExpr>, named: NameExpr },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameExpr {
    Slot(String),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BytesExpr {
    Slot(String),
    Literal(#[serde(with = "crate::b64")] Vec<u8>),
    /// Content the node had before the action.
    PreContent(Box<NodeExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EffectClause {
    Exists(NodeExpr),
    Absent(NodeExpr),
    ParentIs { node: NodeExpr, parent: NodeExpr },
    /// Every child `from` had before the action is a child of `container`
    /// after it, except links whose target is gone.
    ChildrenUnion { container: NodeExpr, from: NodeExpr },
    ContentEquals { node: NodeExpr, content: BytesExpr },
    CountDelta { category: CategoryPattern, delta: i64 },
}

impl fmt::Display for EffectClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}

impl NodeExpr {
    fn collect_slots<'a>(&'a self, out: &mut Vec<(&'a str, ParamType)>) {
        match self {
            NodeExpr::Focus | NodeExpr::FocusParent => {}
            NodeExpr::Slot(s) => out.push((s, ParamType::Node)),
            NodeExpr::Child { of, named } => {
                of.collect_slots(out);
                if let NameExpr::Slot(s) = named {
                    out.push((s, ParamType::Name));
                }
            }
        }
    }
}

impl EffectClause {
    /// Slots the clause mentions, with the type each use requires.
    pub fn slot_uses(&self) -> Vec<(&str, ParamType)> {
        let mut out = Vec::new();
        match self {
            EffectClause::Exists(e) | EffectClause::Absent(e) => e.collect_slots(&mut out),
            EffectClause::ParentIs { node, parent } => {
                node.collect_slots(&mut out);
                parent.collect_slots(&mut out);
            }
            EffectClause::ChildrenUnion { container, from } => {
                container.collect_slots(&mut out);
                from.collect_slots(&mut out);
            }
            EffectClause::ContentEquals { node, content } => {
                node.collect_slots(&mut out);
                match content {
                    BytesExpr::Slot(s) => out.push((s, ParamType::Bytes)),
                    BytesExpr::Literal(_) => {}
                    BytesExpr::PreContent(e) => e.collect_slots(&mut out),
                }
            }
            EffectClause::CountDelta { .. } => {}
        }
        out
    }

    pub fn holds(&self, ctx: &EvalContext<'_>) -> bool {
        match self {
            EffectClause::Exists(e) => ctx.node(e).is_some_and(|id| ctx.post.contains(id)),
            EffectClause::Absent(e) => ctx.node(e).is_none_or(|id| !ctx.post.contains(id)),
            EffectClause::ParentIs { node, parent } => match (ctx.node(node), ctx.node(parent)) {
                (Some(n), Some(p)) => ctx.post.parent_of(n).ok().flatten() == Some(p),
                _ => false,
            },
            EffectClause::ChildrenUnion { container, from } => {
                let (Some(into), Some(source)) = (ctx.node(container), ctx.node(from)) else {
                    return false;
                };
                let Some(before) = ctx.pre.node(source).ok().and_then(|n| n.children()) else {
                    return false;
                };
                let Some(after) = ctx.post.node(into).ok().and_then(|n| n.children()) else {
                    return false;
                };
                let after: BTreeSet<NodeId> = after.iter().copied().collect();
                before.iter().all(|c| after.contains(c) || ctx.dangling_after(*c))
            }
            EffectClause::ContentEquals { node, content } => {
                let Some(id) = ctx.node(node) else { return false };
                let Some(expected) = ctx.bytes(content) else { return false };
                ctx.post.read_content(id).is_ok_and(|actual| actual == expected.as_slice())
            }
            EffectClause::CountDelta { category, delta } => {
                let count = |ws: &Workspace| ws.count(|c| category.matches(c)) as i64;
                count(ctx.post) - count(ctx.pre) == *delta
            }
        }
    }
}

/// The states and parameters a clause is judged against.
pub struct EvalContext<'a> {
    pub pre: &'a Workspace,
    pub post: &'a Workspace,
    pub focus: NodeId,
    pub bindings: &'a Bindings,
}

impl EvalContext<'_> {
    fn node(&self, e: &NodeExpr) -> Option<NodeId> {
        match e {
            NodeExpr::Focus => Some(self.focus),
            NodeExpr::FocusParent => self.pre.parent_of(self.focus).ok().flatten(),
            NodeExpr::Slot(s) => match self.bindings.get(s) {
                Some(Value::Node(id)) => Some(*id),
                _ => None,
            },
            NodeExpr::Child { of, named } => {
                let parent = self.node(of)?;
                let name = match named {
                    NameExpr::Literal(n) => n.as_str(),
                    NameExpr::Slot(s) => match self.bindings.get(s) {
                        Some(Value::Name(n)) => n.as_str(),
                        _ => return None,
                    },
                };
                self.post.child_named(parent, name)
            }
        }
    }

    /// Whether `id` was a link whose target no longer exists.
    fn dangling_after(&self, id: NodeId) -> bool {
        match self.pre.node(id).map(|n| &n.body) {
            Ok(NodeBody::Link { target }) => !self.post.contains(*target) && !self.post.contains(id),
            _ => false,
        }
    }

    fn bytes(&self, e: &BytesExpr) -> Option<Vec<u8>> {
        match e {
            BytesExpr::Slot(s) => match self.bindings.get(s) {
                Some(Value::Bytes(b)) => Some(b.clone()),
                _ => None,
            },
            BytesExpr::Literal(b) => Some(b.clone()),
            BytesExpr::PreContent(node) => {
                let id = self.node(node)?;
                self.pre.read_content(id).ok().map(<[u8]>::to_vec)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ArtifactKind;

    fn named(slot: &str) -> NodeExpr {
        NodeExpr::Child { of: Box::new(NodeExpr::Focus), named: NameExpr::Slot(slot.into()) }
    }

    #[test]
    fn json_shapes() {
        let clause = EffectClause::Exists(named("name"));
        let json = serde_json::to_string(&clause).unwrap();
        assert_eq!(json, r#"{"exists":{"child":{"of":"focus","named":{"slot":"name"}}}}"#);
        assert_eq!(serde_json::from_str::<EffectClause>(&json).unwrap(), clause);
        let bad = r#"{"count_delta":{"category":"container","delta":1,"extra":0}}"#;
        assert!(serde_json::from_str::<EffectClause>(bad).is_err());
    }

    #[test]
    fn creation_clauses() {
        let pre = Workspace::new();
        let (post, _) = pre.create_artifact(pre.root(), ArtifactKind::Text, "draft").unwrap();
        let bindings = Bindings::from([("name".to_owned(), Value::Name("draft".into()))]);
        let ctx = EvalContext { pre: &pre, post: &post, focus: pre.root(), bindings: &bindings };
        assert!(EffectClause::Exists(named("name")).holds(&ctx));
        assert!(!EffectClause::Absent(named("name")).holds(&ctx));
        assert!(EffectClause::ParentIs { node: named("name"), parent: NodeExpr::Focus }.holds(&ctx));
        let text = CategoryPattern::Artifact(Some(ArtifactKind::Text));
        assert!(EffectClause::CountDelta { category: text, delta: 1 }.holds(&ctx));
        assert!(!EffectClause::CountDelta { category: CategoryPattern::Container, delta: 1 }.holds(&ctx));
        assert!(EffectClause::ContentEquals { node: named("name"), content: BytesExpr::Literal(vec![]) }.holds(&ctx));
        // The root has no parent, so clauses about it cannot hold.
        assert!(!EffectClause::Exists(NodeExpr::FocusParent).holds(&ctx));
    }

    #[test]
    fn spill_clause() {
        let ws = Workspace::new();
        let (ws, b) = ws.make_container(ws.root(), "B").unwrap();
        let (ws, _) = ws.create_artifact(b, ArtifactKind::Text, "x").unwrap();
        let (pre, _) = ws.create_artifact(b, ArtifactKind::Text, "y").unwrap();
        let post = pre.dissolve_container(b).unwrap();
        let bindings = Bindings::new();
        let ctx = EvalContext { pre: &pre, post: &post, focus: b, bindings: &bindings };
        let spill = EffectClause::ChildrenUnion { container: NodeExpr::FocusParent, from: NodeExpr::Focus };
        assert!(spill.holds(&ctx));
        assert!(EffectClause::Absent(NodeExpr::Focus).holds(&ctx));
        // A card pointing at the broken box goes with it.
        let (with_card, _) = pre.make_link(b, b, "card").unwrap();
        let post = with_card.dissolve_container(b).unwrap();
        let ctx = EvalContext { pre: &with_card, post: &post, focus: b, bindings: &bindings };
        assert!(spill.holds(&ctx));
        let deleted = pre.delete_node(b).unwrap();
        let ctx = EvalContext { pre: &pre, post: &deleted, focus: b, bindings: &bindings };
        assert!(!spill.holds(&ctx));
    }

    #[test]
    fn slot_uses_are_typed() {
        let clause = EffectClause::ContentEquals {
            node: NodeExpr::Child { of: Box::new(NodeExpr::Slot("dest".into())), named: NameExpr::Slot("name".into()) },
            content: BytesExpr::Slot("body".into()),
        };
        assert_eq!(
            clause.slot_uses(),
            vec![("dest", ParamType::Node), ("name", ParamType::Name), ("body", ParamType::Bytes)]
        );
    }
}
