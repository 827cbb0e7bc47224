//! The metaphor-free core: an information workspace and the algebra of
//! operations on it.
//!
//! A [`Workspace`] is a tree of containers whose leaves are typed artifacts
//! and links. Every operation takes the workspace by reference and returns a
//! new value, so a failed operation never disturbs the caller's state.

mod program;
mod serial;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use program::{
    run_program, AlgebraProgram, Arg, Bindings, OpName, ParamType, ProgramError, Step, Value,
};
pub use serial::{WorkspaceDoc, WorkspaceParseError};

/// Identifier of a node, unique for the lifetime of its workspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Text,
    Audio,
    Image,
    Generic,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 4] = [
        ArtifactKind::Text,
        ArtifactKind::Audio,
        ArtifactKind::Image,
        ArtifactKind::Generic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ArtifactKind::Text => "text",
            ArtifactKind::Audio => "audio",
            ArtifactKind::Image => "image",
            ArtifactKind::Generic => "generic",
        }
    }
}

impl FromStr for ArtifactKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ArtifactKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown artifact kind `{s}`"))
    }
}

/// What a node is, ignoring its identity and contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeCategory {
    Container,
    Link,
    Artifact(ArtifactKind),
}

impl NodeCategory {
    pub const ALL: [NodeCategory; 6] = [
        NodeCategory::Container,
        NodeCategory::Link,
        NodeCategory::Artifact(ArtifactKind::Text),
        NodeCategory::Artifact(ArtifactKind::Audio),
        NodeCategory::Artifact(ArtifactKind::Image),
        NodeCategory::Artifact(ArtifactKind::Generic),
    ];

    /// Tag used in serialized workspaces: `container`, `link`, or the artifact kind.
    pub fn tag(self) -> &'static str {
        match self {
            NodeCategory::Container => "container",
            NodeCategory::Link => "link",
            NodeCategory::Artifact(kind) => kind.as_str(),
        }
    }
}

impl fmt::Display for NodeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeCategory::Artifact(kind) => write!(f, "artifact:{}", kind.as_str()),
            other => f.write_str(other.tag()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeBody {
    Artifact { kind: ArtifactKind, content: Vec<u8> },
    Container { children: Vec<NodeId> },
    Link { target: NodeId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub parent: Option<NodeId>,
    pub body: NodeBody,
}

impl Node {
    pub fn category(&self) -> NodeCategory {
        match &self.body {
            NodeBody::Artifact { kind, .. } => NodeCategory::Artifact(*kind),
            NodeBody::Container { .. } => NodeCategory::Container,
            NodeBody::Link { .. } => NodeCategory::Link,
        }
    }

    pub fn children(&self) -> Option<&[NodeId]> {
        match &self.body {
            NodeBody::Container { children } => Some(children),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is not a container")]
    NotAContainer(NodeId),
    #[error("node {0} is not an artifact")]
    NotAnArtifact(NodeId),
    #[error("container {parent} already has a child named `{name}`")]
    DuplicateName { parent: NodeId, name: String },
    #[error("node names must not be empty")]
    EmptyName,
    #[error("moving {node} into {dest} would create a cycle")]
    CycleForbidden { node: NodeId, dest: NodeId },
    #[error("the root container cannot be moved, dissolved or deleted")]
    RootImmovable,
    #[error("node {0} is a link; links cannot point at links")]
    LinkToLink(NodeId),
}

/// One entry of [`Workspace::list_children`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChildEntry {
    pub id: NodeId,
    pub name: String,
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    root: NodeId,
    nodes: BTreeMap<NodeId, Node>,
    next_id: u64,
}

impl Default for Workspace {
    fn default() -> Self {
        Self::new()
    }
}

pub const ROOT_NAME: &str = "root";

impl Workspace {
    /// A workspace holding only the empty root container.
    pub fn new() -> Self {
        let root = NodeId(0);
        let mut nodes = BTreeMap::new();
        nodes.insert(
            root,
            Node {
                id: root,
                name: ROOT_NAME.to_owned(),
                parent: None,
                body: NodeBody::Container { children: Vec::new() },
            },
        );
        Workspace { root, nodes, next_id: 1 }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    /// The value the next fresh id will take.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, AlgebraError> {
        self.nodes.get(&id).ok_or(AlgebraError::UnknownNode(id))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn parent_of(&self, id: NodeId) -> Result<Option<NodeId>, AlgebraError> {
        Ok(self.node(id)?.parent)
    }

    pub fn category(&self, id: NodeId) -> Result<NodeCategory, AlgebraError> {
        Ok(self.node(id)?.category())
    }

    /// Child of `parent` called `name`, if any.
    pub fn child_named(&self, parent: NodeId, name: &str) -> Option<NodeId> {
        let children = self.nodes.get(&parent)?.children()?;
        children
            .iter()
            .copied()
            .find(|c| self.nodes.get(c).is_some_and(|n| n.name == name))
    }

    /// True when `id` lies in the subtree rooted at `ancestor` (inclusive).
    pub fn is_within(&self, id: NodeId, ancestor: NodeId) -> bool {
        let mut cursor = Some(id);
        while let Some(current) = cursor {
            if current == ancestor {
                return true;
            }
            cursor = self.nodes.get(&current).and_then(|n| n.parent);
        }
        false
    }

    /// Ids of the subtree rooted at `id`, in preorder.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(current) = stack.pop() {
            if let Some(node) = self.nodes.get(&current) {
                out.push(current);
                if let Some(children) = node.children() {
                    stack.extend(children.iter().rev().copied());
                }
            }
        }
        out
    }

    /// Height of the container tree: 0 for a lone root.
    pub fn height(&self) -> usize {
        fn depth(ws: &Workspace, id: NodeId) -> usize {
            ws.nodes[&id]
                .children()
                .map(|cs| cs.iter().map(|c| 1 + depth(ws, *c)).max().unwrap_or(0))
                .unwrap_or(0)
        }
        depth(self, self.root)
    }

    pub fn count(&self, pred: impl Fn(NodeCategory) -> bool) -> usize {
        self.nodes.values().filter(|n| pred(n.category())).count()
    }

    pub fn create_artifact(
        &self,
        parent: NodeId,
        kind: ArtifactKind,
        name: &str,
    ) -> Result<(Workspace, NodeId), AlgebraError> {
        let mut next = self.clone();
        let id = next.insert_child(
            parent,
            name,
            NodeBody::Artifact { kind, content: Vec::new() },
        )?;
        Ok((next, id))
    }

    pub fn make_container(
        &self,
        parent: NodeId,
        name: &str,
    ) -> Result<(Workspace, NodeId), AlgebraError> {
        let mut next = self.clone();
        let id = next.insert_child(parent, name, NodeBody::Container { children: Vec::new() })?;
        Ok((next, id))
    }

    pub fn make_link(
        &self,
        target: NodeId,
        parent: NodeId,
        name: &str,
    ) -> Result<(Workspace, NodeId), AlgebraError> {
        if let NodeBody::Link { .. } = self.node(target)?.body {
            return Err(AlgebraError::LinkToLink(target));
        }
        let mut next = self.clone();
        let id = next.insert_child(parent, name, NodeBody::Link { target })?;
        Ok((next, id))
    }

    /// Replaces an artifact's content. Links write through to their target.
    pub fn write_content(&self, id: NodeId, content: &[u8]) -> Result<Workspace, AlgebraError> {
        let resolved = self.resolve_artifact(id)?;
        let mut next = self.clone();
        if let Some(Node { body: NodeBody::Artifact { content: slot, .. }, .. }) =
            next.nodes.get_mut(&resolved)
        {
            *slot = content.to_vec();
        }
        Ok(next)
    }

    pub fn read_content(&self, id: NodeId) -> Result<&[u8], AlgebraError> {
        let resolved = self.resolve_artifact(id)?;
        match &self.nodes[&resolved].body {
            NodeBody::Artifact { content, .. } => Ok(content),
            _ => Err(AlgebraError::NotAnArtifact(id)),
        }
    }

    pub fn list_children(&self, id: NodeId) -> Result<Vec<ChildEntry>, AlgebraError> {
        let children = self.node(id)?.children().ok_or(AlgebraError::NotAContainer(id))?;
        Ok(children
            .iter()
            .map(|c| {
                let node = &self.nodes[c];
                ChildEntry { id: *c, name: node.name.clone(), category: node.category().to_string() }
            })
            .collect())
    }

    pub fn move_node(&self, id: NodeId, dest: NodeId) -> Result<Workspace, AlgebraError> {
        let node = self.node(id)?;
        let dest_node = self.node(dest)?;
        if id == self.root {
            return Err(AlgebraError::RootImmovable);
        }
        if dest_node.children().is_none() {
            return Err(AlgebraError::NotAContainer(dest));
        }
        if self.is_within(dest, id) {
            return Err(AlgebraError::CycleForbidden { node: id, dest });
        }
        if self.child_named(dest, &node.name).is_some_and(|c| c != id) {
            return Err(AlgebraError::DuplicateName { parent: dest, name: node.name.clone() });
        }
        let mut next = self.clone();
        next.detach(id);
        next.children_mut(dest).push(id);
        next.nodes.get_mut(&id).expect("checked").parent = Some(dest);
        Ok(next)
    }

    /// Removes a container and splices its children, in order, into its
    /// parent at the container's former position.
    pub fn dissolve_container(&self, id: NodeId) -> Result<Workspace, AlgebraError> {
        let node = self.node(id)?;
        let children = node.children().ok_or(AlgebraError::NotAContainer(id))?.to_vec();
        if id == self.root {
            return Err(AlgebraError::RootImmovable);
        }
        let parent = node.parent.expect("non-root nodes have a parent");
        let siblings = self.nodes[&parent].children().expect("parents are containers");
        for child in &children {
            let name = &self.nodes[child].name;
            let clash = siblings
                .iter()
                .any(|s| *s != id && self.nodes[s].name == *name);
            if clash {
                return Err(AlgebraError::DuplicateName { parent, name: name.clone() });
            }
        }

        let mut next = self.clone();
        let slot = next.children_mut(parent);
        let at = slot.iter().position(|c| *c == id).expect("child listed by parent");
        slot.splice(at..=at, children.iter().copied());
        for child in &children {
            next.nodes.get_mut(child).expect("exists").parent = Some(parent);
        }
        next.nodes.remove(&id);
        next.remove_links_into(&[id]);
        Ok(next)
    }

    /// Removes a node with its whole subtree and every link pointing into it.
    pub fn delete_node(&self, id: NodeId) -> Result<Workspace, AlgebraError> {
        self.node(id)?;
        if id == self.root {
            return Err(AlgebraError::RootImmovable);
        }
        let mut next = self.clone();
        let doomed = next.subtree(id);
        next.detach(id);
        for gone in &doomed {
            next.nodes.remove(gone);
        }
        next.remove_links_into(&doomed);
        Ok(next)
    }

    /// Checks every structural invariant; returns the list of violations.
    pub fn audit(&self) -> Result<(), Vec<String>> {
        let mut problems = Vec::new();
        match self.nodes.get(&self.root) {
            Some(root) => {
                if root.parent.is_some() {
                    problems.push("root has a parent".to_owned());
                }
                if root.children().is_none() {
                    problems.push("root is not a container".to_owned());
                }
            }
            None => problems.push("root node missing".to_owned()),
        }

        let mut seen: BTreeMap<NodeId, usize> = BTreeMap::new();
        for node in self.nodes.values() {
            if node.id.0 >= self.next_id {
                problems.push(format!("{} not below id counter {}", node.id, self.next_id));
            }
            if node.name.is_empty() {
                problems.push(format!("{} has an empty name", node.id));
            }
            if let Some(children) = node.children() {
                let mut names = std::collections::BTreeSet::new();
                for child in children {
                    *seen.entry(*child).or_default() += 1;
                    match self.nodes.get(child) {
                        None => problems.push(format!("{} lists missing child {child}", node.id)),
                        Some(c) => {
                            if c.parent != Some(node.id) {
                                problems.push(format!("{child} does not name {} as parent", node.id));
                            }
                            if !names.insert(c.name.as_str()) {
                                problems.push(format!("{} has duplicate child name `{}`", node.id, c.name));
                            }
                        }
                    }
                }
            }
            if let NodeBody::Link { target } = node.body {
                match self.nodes.get(&target) {
                    None => problems.push(format!("link {} dangles to {target}", node.id)),
                    Some(t) if matches!(t.body, NodeBody::Link { .. }) => {
                        problems.push(format!("link {} points at link {target}", node.id))
                    }
                    Some(_) => {}
                }
            }
        }
        for (id, n) in &seen {
            if *n > 1 {
                problems.push(format!("{id} listed by {n} containers"));
            }
        }
        for node in self.nodes.values() {
            if node.id != self.root && !seen.contains_key(&node.id) {
                problems.push(format!("{} is not listed by any container", node.id));
            }
        }
        let reachable = self.subtree(self.root);
        if reachable.len() != self.nodes.len() {
            problems.push(format!(
                "{} of {} nodes reachable from root",
                reachable.len(),
                self.nodes.len()
            ));
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    fn resolve_artifact(&self, id: NodeId) -> Result<NodeId, AlgebraError> {
        let resolved = match self.node(id)?.body {
            NodeBody::Link { target } => target,
            _ => id,
        };
        match self.node(resolved)?.body {
            NodeBody::Artifact { .. } => Ok(resolved),
            _ => Err(AlgebraError::NotAnArtifact(id)),
        }
    }

    fn insert_child(
        &mut self,
        parent: NodeId,
        name: &str,
        body: NodeBody,
    ) -> Result<NodeId, AlgebraError> {
        if self.node(parent)?.children().is_none() {
            return Err(AlgebraError::NotAContainer(parent));
        }
        if name.is_empty() {
            return Err(AlgebraError::EmptyName);
        }
        if self.child_named(parent, name).is_some() {
            return Err(AlgebraError::DuplicateName { parent, name: name.to_owned() });
        }
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes.insert(id, Node { id, name: name.to_owned(), parent: Some(parent), body });
        self.children_mut(parent).push(id);
        Ok(id)
    }

    fn children_mut(&mut self, id: NodeId) -> &mut Vec<NodeId> {
        match &mut self.nodes.get_mut(&id).expect("container exists").body {
            NodeBody::Container { children } => children,
            _ => panic!("{id} is not a container"),
        }
    }

    fn detach(&mut self, id: NodeId) {
        if let Some(parent) = self.nodes.get(&id).and_then(|n| n.parent) {
            self.children_mut(parent).retain(|c| *c != id);
        }
    }

    fn remove_links_into(&mut self, targets: &[NodeId]) {
        let dangling: Vec<NodeId> = self
            .nodes
            .values()
            .filter(|n| matches!(n.body, NodeBody::Link { target } if targets.contains(&target)))
            .map(|n| n.id)
            .collect();
        for link in dangling {
            self.detach(link);
            self.nodes.remove(&link);
        }
    }

    /// Assembles a workspace from already-checked parts.
    pub(crate) fn from_parts(root: NodeId, nodes: BTreeMap<NodeId, Node>, next_id: u64) -> Self {
        Workspace { root, nodes, next_id }
    }
}
