use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::RwLock;
use semiom_core::algebra::{NodeId, Workspace};
use semiom_core::conversation::{transcript_to_records, Move, MoveRecord, MoveTemplate, Phase, Session};
use semiom_core::manifest::{render, Direction, Layout, RenderError, RenderTree};
use semiom_core::pack::{parse_pack, LocalePack, PackError, ValidationReport};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ServiceError;

#[derive(Debug, Error)]
pub enum PackLoadError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: PackError },
    #[error("pack `{id}` has {} validation errors", report.errors().count())]
    Invalid { id: String, report: ValidationReport },
}

/// The packs a server can host, keyed by `meta.id`. Only packs that validate
/// without errors are admitted.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    packs: BTreeMap<String, Arc<LocalePack>>,
}

impl Registry {
    pub fn bundled() -> Registry {
        let mut registry = Registry::default();
        for pack in semiom_core::bundled::packs() {
            registry.packs.insert(pack.meta.id.clone(), pack);
        }
        registry
    }

    pub fn insert(&mut self, pack: LocalePack) -> Result<(), PackLoadError> {
        let report = pack.validate();
        if report.has_errors() {
            return Err(PackLoadError::Invalid { id: pack.meta.id, report });
        }
        self.packs.insert(pack.meta.id.clone(), Arc::new(pack));
        Ok(())
    }

    /// Adds every `*.json` pack in `dir`, replacing packs with the same id.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, PackLoadError> {
        let io_err = |source| PackLoadError::Io { path: dir.to_owned(), source };
        let mut paths = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(io_err)? {
            let path = entry.map_err(io_err)?.path();
            if path.extension().is_some_and(|e| e == "json") {
                paths.push(path);
            }
        }
        paths.sort();
        for path in &paths {
            let bytes = std::fs::read(path).map_err(|source| PackLoadError::Io { path: path.clone(), source })?;
            let pack = parse_pack(&bytes).map_err(|source| PackLoadError::Parse { path: path.clone(), source })?;
            self.insert(pack)?;
        }
        Ok(paths.len())
    }

    pub fn get(&self, id: &str) -> Option<&Arc<LocalePack>> {
        self.packs.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<LocalePack>> {
        self.packs.values()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestInfo {
    pub id: String,
    pub layout: Layout,
    pub direction: Direction,
    pub formality: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackInfo {
    pub id: String,
    pub locale: String,
    pub version: u32,
    pub anchor: String,
    pub manifests: Vec<ManifestInfo>,
}

impl From<&LocalePack> for PackInfo {
    fn from(pack: &LocalePack) -> Self {
        PackInfo {
            id: pack.meta.id.clone(),
            locale: pack.meta.locale.clone(),
            version: pack.meta.version.get(),
            anchor: pack.anchor.id.clone(),
            manifests: pack
                .manifests
                .iter()
                .map(|m| ManifestInfo {
                    id: m.id.clone(),
                    layout: m.layout,
                    direction: m.direction,
                    formality: m.formality.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handle {
    pub session_id: String,
    pub pack_id: String,
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegalView {
    pub revision: u64,
    pub pack_id: String,
    pub phase: Phase,
    pub legal: Vec<MoveTemplate>,
    pub transcript: Vec<MoveRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posted {
    pub revision: u64,
    pub system_moves: Vec<MoveRecord>,
}

/// Transcript length at which a session switched to `pack_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapMark {
    pub at: usize,
    pub pack_id: String,
}

#[derive(Debug, Clone)]
pub(crate) struct Hosted {
    pub(crate) pack_id: String,
    pub(crate) revision: u64,
    pub(crate) session: Session,
    pub(crate) initial_pack_id: String,
    pub(crate) swaps: Vec<SwapMark>,
}

impl Hosted {
    fn handle(&self) -> Handle {
        Handle { session_id: self.session.id.clone(), pack_id: self.pack_id.clone(), revision: self.revision }
    }
}

type Slot = Arc<RwLock<Hosted>>;

/// Live sessions over a fixed registry. Mutations of one session are
/// serialized by its lock; distinct sessions proceed independently.
#[derive(Debug, Default)]
pub struct Store {
    registry: Registry,
    sessions: RwLock<HashMap<String, Slot>>,
}

impl Store {
    pub fn new(registry: Registry) -> Store {
        Store { registry, sessions: RwLock::new(HashMap::new()) }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn packs(&self) -> Vec<PackInfo> {
        self.registry.iter().map(|p| PackInfo::from(p.as_ref())).collect()
    }

    fn pack(&self, id: &str) -> Result<&Arc<LocalePack>, ServiceError> {
        self.registry.get(id).ok_or_else(|| ServiceError::UnknownPack(id.to_owned()))
    }

    fn slot(&self, id: &str) -> Result<Slot, ServiceError> {
        self.sessions.read().get(id).cloned().ok_or_else(|| ServiceError::UnknownSession(id.to_owned()))
    }

    /// Snapshot of one session taken under its lock.
    fn read(&self, id: &str) -> Result<Hosted, ServiceError> {
        Ok(self.slot(id)?.read().clone())
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().keys().cloned().collect();
        ids.sort();
        ids
    }

    pub(crate) fn hosted(&self) -> Vec<Hosted> {
        let slots: Vec<Slot> = self.sessions.read().values().cloned().collect();
        let mut all: Vec<Hosted> = slots.iter().map(|s| s.read().clone()).collect();
        all.sort_by(|a, b| a.session.id.cmp(&b.session.id));
        all
    }

    pub(crate) fn adopt(&self, hosted: Hosted) {
        self.sessions.write().insert(hosted.session.id.clone(), Arc::new(RwLock::new(hosted)));
    }

    /// Opens a conversation over `workspace`, or an empty workspace.
    pub fn create_session(&self, pack_id: &str, workspace: Option<Workspace>) -> Result<Handle, ServiceError> {
        let pack = self.pack(pack_id)?.clone();
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::new(pack, workspace.unwrap_or_default())
            .map_err(ServiceError::IllegalMove)?
            .with_id(id);
        let hosted =
            Hosted { pack_id: pack_id.to_owned(), revision: 0, session, initial_pack_id: pack_id.to_owned(), swaps: Vec::new() };
        let handle = hosted.handle();
        self.adopt(hosted);
        Ok(handle)
    }

    pub fn handle(&self, id: &str) -> Result<Handle, ServiceError> {
        Ok(self.read(id)?.handle())
    }

    /// Submits a user move if the session is still at `expected_revision`.
    pub fn post_move(&self, id: &str, mv: Move, expected_revision: u64) -> Result<Posted, ServiceError> {
        let slot = self.slot(id)?;
        let mut hosted = slot.write();
        if hosted.revision != expected_revision {
            return Err(ServiceError::RevisionConflict { expected: expected_revision, current: hosted.revision });
        }
        let (next, replies) = hosted.session.submit_move(mv).map_err(ServiceError::IllegalMove)?;
        let first_seq = next.transcript().len() - replies.len();
        hosted.session = next;
        hosted.revision += 1;
        let system_moves =
            replies.into_iter().enumerate().map(|(i, mv)| MoveRecord { seq: first_seq + i, mv }).collect();
        Ok(Posted { revision: hosted.revision, system_moves })
    }

    /// Continues the session under another pack, keeping workspace and
    /// transcript.
    pub fn swap_pack(&self, id: &str, pack_id: &str) -> Result<Handle, ServiceError> {
        let pack = self.pack(pack_id)?.clone();
        let slot = self.slot(id)?;
        let mut hosted = slot.write();
        let next = hosted.session.swap_pack(pack).map_err(ServiceError::IncompatibleAnchor)?;
        let at = next.transcript().len();
        hosted.session = next;
        hosted.pack_id = pack_id.to_owned();
        hosted.swaps.push(SwapMark { at, pack_id: pack_id.to_owned() });
        hosted.revision += 1;
        Ok(hosted.handle())
    }

    pub fn legal(&self, id: &str) -> Result<LegalView, ServiceError> {
        let hosted = self.read(id)?;
        Ok(LegalView {
            revision: hosted.revision,
            pack_id: hosted.pack_id,
            phase: hosted.session.phase(),
            legal: hosted.session.legal_moves(),
            transcript: transcript_to_records(hosted.session.transcript()),
        })
    }

    pub fn workspace(&self, id: &str) -> Result<(u64, Workspace), ServiceError> {
        let hosted = self.read(id)?;
        Ok((hosted.revision, hosted.session.workspace().clone()))
    }

    /// Renders the session through one manifest of its current pack.
    pub fn render(&self, id: &str, manifest: Option<&str>, focus: Option<NodeId>) -> Result<(u64, RenderTree), ServiceError> {
        let hosted = self.read(id)?;
        let tree = render(&hosted.session, hosted.session.pack(), manifest, focus).map_err(|e| match e {
            RenderError::UnknownManifest(m) => ServiceError::UnknownManifest(m),
            RenderError::UnknownNode(n) => ServiceError::UnknownNode(n),
            other => ServiceError::BadRequest(other.to_string()),
        })?;
        Ok((hosted.revision, tree))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn revisions_count_accepted_writes_only() {
        let store = Store::new(Registry::bundled());
        let h = store.create_session("office", None).unwrap();
        assert_eq!(h.revision, 0);
        assert_eq!(store.post_move(&h.session_id, Move::close(), 0).unwrap_err().code(), "illegal_move");
        let posted = store.post_move(&h.session_id, Move::summon(), 0).unwrap();
        assert_eq!(posted.revision, 1);
        assert_eq!(posted.system_moves[0].seq, 1);
        assert!(matches!(
            store.post_move(&h.session_id, Move::summon(), 0),
            Err(ServiceError::RevisionConflict { expected: 0, current: 1 })
        ));
        assert_eq!(store.swap_pack(&h.session_id, "office").unwrap().revision, 2);
        assert_eq!(store.create_session("nope", None).unwrap_err(), ServiceError::UnknownPack("nope".into()));
        assert_eq!(store.handle("nope").unwrap_err().status(), 404);
    }

    #[test]
    fn invalid_packs_are_refused() {
        let mut pack = (*semiom_core::bundled::office()).clone();
        pack.manifests.clear();
        assert!(matches!(Registry::default().insert(pack), Err(PackLoadError::Invalid { .. })));
    }
}
