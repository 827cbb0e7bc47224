//! Projection of a session onto a manifest.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{
    apply_direction, resolve_message, Direction, Layout, ManifestConfig, MessageCatalog, MessageError, RegionRole,
    RenderNode, RenderTree, Side,
};
use crate::algebra::{NodeId, Value, Workspace};
use crate::conversation::{keys, Actor, Move, MoveKind, Outcome, Session};
use crate::pack::{LocalePack, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("the locale pack is not valid")]
    InvalidPack(ValidationReport),
    #[error("unknown manifest `{0}`")]
    UnknownManifest(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error(transparent)]
    Message(#[from] MessageError),
}

struct Texts<'a> {
    pack: &'a LocalePack,
    catalog: &'a MessageCatalog,
    formality: &'a str,
}

impl Texts<'_> {
    fn message(&self, key: &str, args: &[(&str, String)]) -> Result<String, MessageError> {
        let args: BTreeMap<String, String> = args.iter().map(|(k, v)| ((*k).to_owned(), v.clone())).collect();
        resolve_message(self.catalog, key, self.formality, &args)
    }

    fn action_label(&self, id: &str) -> Result<String, MessageError> {
        match self.pack.anchor.action(id) {
            Some(action) => self.message(&action.label, &[]),
            // A transcript recorded under another pack may name actions this
            // anchor lacks.
            None => Ok(id.to_owned()),
        }
    }

    /// The anchor's word for the node, translated when the catalog has an
    /// `object.<word>` entry.
    fn object(&self, ws: &Workspace, node: NodeId) -> Result<String, MessageError> {
        let Ok(category) = ws.category(node) else { return Ok(node.to_string()) };
        let Some(word) = self.pack.anchor.object_for(category) else { return Ok(category.to_string()) };
        let key = format!("object.{word}");
        if self.catalog.entries.contains_key(&key) {
            self.message(&key, &[])
        } else {
            Ok(word.to_owned())
        }
    }
}

fn describe_value(ws: &Workspace, value: &Value) -> String {
    match value {
        Value::Name(name) => name.clone(),
        Value::Node(id) => ws.node(*id).map(|n| n.name.clone()).unwrap_or_else(|_| id.to_string()),
        Value::Bytes(bytes) => String::from_utf8_lossy(bytes).into_owned(),
    }
}

fn dialogue(texts: &Texts<'_>, layout: Layout, transcript: &[Move], ws: &Workspace) -> Result<Vec<RenderNode>, MessageError> {
    let side = |actor| match (layout, actor) {
        (Layout::ChatOpposedColumns, Actor::User) => Some(Side::End),
        (Layout::ChatOpposedColumns, Actor::System) => Some(Side::Start),
        _ => None,
    };
    let mut current: Option<(String, NodeId)> = None;
    let mut out = Vec::with_capacity(transcript.len());
    for mv in transcript {
        let need_args = |current: &Option<(String, NodeId)>| -> Result<Vec<(&'static str, String)>, MessageError> {
            match current {
                Some((action, focus)) => {
                    Ok(vec![("action", texts.action_label(action)?), ("object", texts.object(ws, *focus)?)])
                }
                None => Ok(Vec::new()),
            }
        };
        let text = match &mv.kind {
            MoveKind::Summon => texts.message(keys::SUMMON, &[])?,
            MoveKind::Offer => texts.message(keys::OFFER, &[])?,
            MoveKind::DeclineGeneral { reason } => texts.message(reason, &[])?,
            MoveKind::StateNeed { need, focus } => {
                current = Some((need.clone(), focus.unwrap_or(ws.root())));
                texts.message(keys::STATE_NEED, &need_args(&current)?)?
            }
            MoveKind::ConfirmCapability => texts.message(keys::CONFIRM, &need_args(&current)?)?,
            MoveKind::DeclineSpecific { reason } => texts.message(reason, &need_args(&current)?)?,
            MoveKind::ProvideDetail { bindings } => {
                let details = bindings.values().map(|v| describe_value(ws, v)).collect::<Vec<_>>().join(", ");
                let mut args = need_args(&current)?;
                args.push(("details", details));
                texts.message(keys::DETAIL, &args)?
            }
            MoveKind::Resolve { outcome, .. } => {
                let key = match outcome {
                    Outcome::Ok => keys::RESOLVED,
                    Outcome::Error => keys::FAILED,
                };
                texts.message(key, &need_args(&current)?)?
            }
            MoveKind::Close => texts.message(keys::CLOSE, &[])?,
        };
        out.push(RenderNode::Message { text, speaker: mv.actor, side: side(mv.actor) });
    }
    Ok(out)
}

/// Renders `session` through `pack` and one of its manifests (the first
/// when `manifest_id` is `None`), showing the children of `focus` (the
/// root when `None`).
pub fn render(
    session: &Session,
    pack: &LocalePack,
    manifest_id: Option<&str>,
    focus: Option<NodeId>,
) -> Result<RenderTree, RenderError> {
    let report = pack.validate();
    if report.has_errors() {
        return Err(RenderError::InvalidPack(report));
    }
    let manifest: &ManifestConfig = match manifest_id {
        Some(id) => pack.manifest(id).ok_or_else(|| RenderError::UnknownManifest(id.to_owned()))?,
        None => pack.manifests.first().ok_or_else(|| RenderError::UnknownManifest(String::new()))?,
    };
    let catalog = pack.catalog(&manifest.catalog).ok_or_else(|| RenderError::UnknownManifest(manifest.id.clone()))?;
    let texts = Texts { pack, catalog, formality: &manifest.formality };

    let ws = session.workspace();
    let focus = focus.unwrap_or(ws.root());
    let node = ws.node(focus).map_err(|_| RenderError::UnknownNode(focus))?;

    let rows = node
        .children()
        .unwrap_or_default()
        .iter()
        .map(|&child| {
            let child = ws.node(child).expect("children of a sound workspace exist");
            RenderNode::Row {
                node: child.id,
                name: child.name.clone(),
                glyph: pack.anchor.object_for(child.category()).map(str::to_owned),
            }
        })
        .collect();

    let enabled = pack.anchor.enabled_actions(ws, focus).map_err(|_| RenderError::UnknownNode(focus))?;
    let mut actions = Vec::with_capacity(enabled.len());
    for action in enabled {
        actions.push(RenderNode::Action {
            action: action.id.clone(),
            glyph: manifest.glyph_for(&action.id).map(str::to_owned),
            label: texts.message(&action.label, &[])?,
        });
    }

    let logical = RenderTree {
        manifest: manifest.id.clone(),
        direction: Direction::Ltr,
        layout: manifest.layout,
        affirmative: manifest.affirmative,
        regions: vec![
            RenderNode::Region {
                role: RegionRole::Dialogue,
                direction_sensitive: false,
                children: dialogue(&texts, manifest.layout, session.transcript(), ws)?,
            },
            RenderNode::Region { role: RegionRole::Workspace, direction_sensitive: false, children: rows },
            RenderNode::Region { role: RegionRole::Actions, direction_sensitive: true, children: actions },
        ],
    };
    Ok(apply_direction(&logical, manifest.direction))
}
