//! Canonical JSON form of a workspace.
//!
//! Nodes are listed by ascending id and child lists keep their order, so two
//! workspaces are equal exactly when their serializations are byte-identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ArtifactKind, Node, NodeBody, NodeId, Workspace};
use crate::b64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceDoc {
    pub root: NodeId,
    pub next_id: u64,
    pub nodes: Vec<NodeDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: NodeId,
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Vec<NodeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "b64::option")]
    pub content: Option<Vec<u8>>,
}

#[derive(Debug, Error)]
pub enum WorkspaceParseError {
    #[error("malformed workspace document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid workspace: {0}")]
    Invalid(String),
}

impl From<&Workspace> for WorkspaceDoc {
    fn from(ws: &Workspace) -> Self {
        let nodes = ws
            .nodes()
            .map(|node| {
                let mut doc = NodeDoc {
                    id: node.id,
                    name: node.name.clone(),
                    kind: node.category().tag().to_owned(),
                    children: None,
                    target: None,
                    content: None,
                };
                match &node.body {
                    NodeBody::Container { children } => doc.children = Some(children.clone()),
                    NodeBody::Link { target } => doc.target = Some(*target),
                    NodeBody::Artifact { content, .. } => doc.content = Some(content.clone()),
                }
                doc
            })
            .collect();
        WorkspaceDoc { root: ws.root(), next_id: ws.next_id(), nodes }
    }
}

impl From<Workspace> for WorkspaceDoc {
    fn from(ws: Workspace) -> Self {
        WorkspaceDoc::from(&ws)
    }
}

impl TryFrom<WorkspaceDoc> for Workspace {
    type Error = WorkspaceParseError;

    fn try_from(doc: WorkspaceDoc) -> Result<Self, Self::Error> {
        let invalid = |msg: String| WorkspaceParseError::Invalid(msg);
        let mut nodes = BTreeMap::new();
        for nd in doc.nodes {
            let body = match nd.kind.as_str() {
                "container" => NodeBody::Container {
                    children: nd
                        .children
                        .ok_or_else(|| invalid(format!("container {} lacks children", nd.id)))?,
                },
                "link" => NodeBody::Link {
                    target: nd
                        .target
                        .ok_or_else(|| invalid(format!("link {} lacks target", nd.id)))?,
                },
                other => NodeBody::Artifact {
                    kind: other.parse::<ArtifactKind>().map_err(invalid)?,
                    content: nd.content.unwrap_or_default(),
                },
            };
            let node = Node { id: nd.id, name: nd.name, parent: None, body };
            if nodes.insert(nd.id, node).is_some() {
                return Err(invalid(format!("duplicate node id {}", nd.id)));
            }
        }
        let links: Vec<(NodeId, NodeId)> = nodes
            .values()
            .flat_map(|n| n.children().unwrap_or(&[]).iter().map(move |c| (n.id, *c)))
            .collect();
        for (parent, child) in links {
            if let Some(node) = nodes.get_mut(&child) {
                node.parent = Some(parent);
            }
        }
        let ws = Workspace::from_parts(doc.root, nodes, doc.next_id);
        ws.audit().map_err(|problems| invalid(problems.join("; ")))?;
        Ok(ws)
    }
}

impl Serialize for Workspace {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WorkspaceDoc::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Workspace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = WorkspaceDoc::deserialize(deserializer)?;
        Workspace::try_from(doc).map_err(serde::de::Error::custom)
    }
}

impl Workspace {
    /// Compact canonical serialization, used for byte-exact state comparison.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(&WorkspaceDoc::from(self)).expect("workspace documents serialize")
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(&WorkspaceDoc::from(self)).expect("workspace documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Workspace, WorkspaceParseError> {
        let doc: WorkspaceDoc = serde_json::from_str(text)?;
        Workspace::try_from(doc)
    }
}
