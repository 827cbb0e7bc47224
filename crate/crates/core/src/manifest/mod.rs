//! Manifest systems: everything that appears on screen.
//!
//! A [`ManifestConfig`] selects layout, writing direction, formality and
//! glyphs over one anchor. [`render`] turns a session into a pixel-free
//! [`RenderTree`], the only thing a front end ever sees.

mod catalog;
mod render;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::NodeId;
use crate::anchor::AnchorDefinition;
use crate::conversation::Actor;

pub use catalog::{placeholders, resolve_message, MessageCatalog, MessageError};
pub use render::{render, RenderError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Ltr,
    Rtl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    Toolbar,
    Menu,
    ChatOpposedColumns,
    ChatCircle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffirmativePosition {
    Leading,
    Trailing,
}

impl AffirmativePosition {
    fn swapped(self) -> Self {
        match self {
            AffirmativePosition::Leading => AffirmativePosition::Trailing,
            AffirmativePosition::Trailing => AffirmativePosition::Leading,
        }
    }
}

/// Glyphs for a set of actions that signify by contrast with each other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolGroup {
    pub id: String,
    /// action id → glyph id
    pub members: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestConfig {
    pub id: String,
    pub anchor: String,
    pub direction: Direction,
    pub layout: Layout,
    pub affirmative: AffirmativePosition,
    pub formality: String,
    #[serde(default)]
    pub symbol_groups: Vec<SymbolGroup>,
    pub catalog: String,
}

impl ManifestConfig {
    /// Glyph of `action` in the first symbol group that lists it.
    pub fn glyph_for(&self, action: &str) -> Option<&str> {
        self.symbol_groups.iter().find_map(|g| g.members.get(action)).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolGroupError {
    #[error("group `{group}`: actions `{first}` and `{second}` share glyph `{glyph}`")]
    DuplicateGlyph { group: String, first: String, second: String, glyph: String },
    #[error("group `{group}`: unknown action `{action}`")]
    UnknownAction { group: String, action: String },
}

/// A symbol group is sound when its glyphs are pairwise distinct and every
/// member names an action of the anchor.
pub fn validate_symbol_group(group: &SymbolGroup, anchor: &AnchorDefinition) -> Result<(), Vec<SymbolGroupError>> {
    let mut errors = Vec::new();
    let mut by_glyph: BTreeMap<&str, &str> = BTreeMap::new();
    for (action, glyph) in &group.members {
        if anchor.action(action).is_none() {
            errors.push(SymbolGroupError::UnknownAction { group: group.id.clone(), action: action.clone() });
        }
        if let Some(first) = by_glyph.insert(glyph, action) {
            errors.push(SymbolGroupError::DuplicateGlyph {
                group: group.id.clone(),
                first: first.to_owned(),
                second: action.clone(),
                glyph: glyph.clone(),
            });
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionRole {
    Actions,
    Workspace,
    Dialogue,
}

/// Logical column of a chat bubble; `start` follows the writing direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RenderNode {
    Region {
        role: RegionRole,
        direction_sensitive: bool,
        children: Vec<RenderNode>,
    },
    Action {
        action: String,
        glyph: Option<String>,
        label: String,
    },
    Message {
        text: String,
        speaker: Actor,
        side: Option<Side>,
    },
    Row {
        node: NodeId,
        name: String,
        glyph: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderTree {
    pub manifest: String,
    pub direction: Direction,
    pub layout: Layout,
    pub affirmative: AffirmativePosition,
    pub regions: Vec<RenderNode>,
}

impl RenderTree {
    pub fn region(&self, role: RegionRole) -> Option<&[RenderNode]> {
        self.regions.iter().find_map(|r| match r {
            RenderNode::Region { role: found, children, .. } if *found == role => Some(children.as_slice()),
            _ => None,
        })
    }

    /// Action ids in the actions region, in display order.
    pub fn action_ids(&self) -> Vec<&str> {
        self.region(RegionRole::Actions)
            .unwrap_or_default()
            .iter()
            .filter_map(|n| match n {
                RenderNode::Action { action, .. } => Some(action.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Every node of the tree, depth first.
    pub fn all_nodes(&self) -> Vec<&RenderNode> {
        fn walk<'a>(node: &'a RenderNode, out: &mut Vec<&'a RenderNode>) {
            out.push(node);
            if let RenderNode::Region { children, .. } = node {
                for child in children {
                    walk(child, out);
                }
            }
        }
        let mut out = Vec::new();
        for region in &self.regions {
            walk(region, &mut out);
        }
        out
    }

    /// Every user-facing string in the tree.
    pub fn texts(&self) -> Vec<&str> {
        self.all_nodes()
            .into_iter()
            .filter_map(|n| match n {
                RenderNode::Action { label, .. } => Some(label.as_str()),
                RenderNode::Message { text, .. } => Some(text.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("render trees serialize")
    }
}

fn mirror(node: &mut RenderNode) {
    if let RenderNode::Region { direction_sensitive, children, .. } = node {
        if *direction_sensitive {
            children.reverse();
        }
        children.iter_mut().for_each(mirror);
    }
}

/// Lays `tree` out for a writing direction. Right-to-left mirrors every
/// direction-sensitive region and swaps the affirmative position; applying
/// it twice gives back the original. Left-to-right leaves the tree as is.
pub fn apply_direction(tree: &RenderTree, direction: Direction) -> RenderTree {
    let mut out = tree.clone();
    if direction == Direction::Rtl {
        out.regions.iter_mut().for_each(mirror);
        out.affirmative = out.affirmative.swapped();
        out.direction = match out.direction {
            Direction::Ltr => Direction::Rtl,
            Direction::Rtl => Direction::Ltr,
        };
    }
    out
}
