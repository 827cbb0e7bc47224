//! Saving live sessions to disk and bringing them back.
//!
//! A snapshot records the starting workspace, the full transcript and the
//! points where the pack was swapped. Restoring replays the transcript
//! segment by segment, so a tampered file is rejected rather than trusted.

use std::io;
use std::path::Path;

use semiom_core::algebra::Workspace;
use semiom_core::conversation::{
    resume, transcript_from_records, transcript_to_records, ConversationError, MoveRecord, Session, SwapError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{Hosted, Store, SwapMark};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionSnapshot {
    pub session_id: String,
    pub pack_id: String,
    pub revision: u64,
    pub initial_pack_id: String,
    pub initial_workspace: Workspace,
    pub swaps: Vec<SwapMark>,
    pub transcript: Vec<MoveRecord>,
    pub workspace: Workspace,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot i/o: {0}")]
    Io(#[from] io::Error),
    #[error("malformed snapshot: {0}")]
    Format(#[from] serde_json::Error),
    #[error("session `{session}` uses unknown pack `{pack}`")]
    UnknownPack { session: String, pack: String },
    #[error("session `{session}` does not replay: {source}")]
    Replay { session: String, source: ConversationError },
    #[error("session `{session}` cannot swap packs: {source}")]
    Swap { session: String, source: SwapError },
    #[error("session `{session}` replays to a different workspace or pack")]
    Diverged { session: String },
}

impl From<&Hosted> for SessionSnapshot {
    fn from(h: &Hosted) -> Self {
        SessionSnapshot {
            session_id: h.session.id.clone(),
            pack_id: h.pack_id.clone(),
            revision: h.revision,
            initial_pack_id: h.initial_pack_id.clone(),
            initial_workspace: h.session.initial_workspace().clone(),
            swaps: h.swaps.clone(),
            transcript: transcript_to_records(h.session.transcript()),
            workspace: h.session.workspace().clone(),
        }
    }
}

impl Store {
    pub fn snapshot(&self) -> Vec<SessionSnapshot> {
        self.hosted().iter().map(SessionSnapshot::from).collect()
    }

    /// Writes every session to `path`, replacing it atomically.
    pub fn write_snapshot(&self, path: &Path) -> Result<usize, SnapshotError> {
        let all = self.snapshot();
        let mut text = serde_json::to_string_pretty(&all)?;
        text.push('\n');
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, path)?;
        Ok(all.len())
    }

    /// Replays one snapshot and hosts the result under its recorded id and
    /// revision.
    pub fn restore(&self, snap: SessionSnapshot) -> Result<(), SnapshotError> {
        let session_id = snap.session_id.clone();
        let pack = |id: &str| {
            self.registry()
                .get(id)
                .cloned()
                .ok_or_else(|| SnapshotError::UnknownPack { session: session_id.clone(), pack: id.to_owned() })
        };
        let replay_err = |source| SnapshotError::Replay { session: session_id.clone(), source };
        let moves = transcript_from_records(snap.transcript);
        let mut session = Session::new(pack(&snap.initial_pack_id)?, snap.initial_workspace)
            .map_err(replay_err)?
            .with_id(session_id.clone());
        let mut cursor = 0;
        let mut current = snap.initial_pack_id.clone();
        for mark in &snap.swaps {
            let segment = moves.get(cursor..mark.at).ok_or_else(|| SnapshotError::Diverged { session: session_id.clone() })?;
            session = resume(session, segment).map_err(replay_err)?;
            session = session
                .swap_pack(pack(&mark.pack_id)?)
                .map_err(|source| SnapshotError::Swap { session: session_id.clone(), source })?;
            cursor = mark.at;
            current = mark.pack_id.clone();
        }
        let rest = moves.get(cursor..).ok_or_else(|| SnapshotError::Diverged { session: session_id.clone() })?;
        session = resume(session, rest).map_err(replay_err)?;
        if session.workspace() != &snap.workspace || current != snap.pack_id {
            return Err(SnapshotError::Diverged { session: session_id });
        }
        self.adopt(Hosted {
            pack_id: snap.pack_id,
            revision: snap.revision,
            session,
            initial_pack_id: snap.initial_pack_id,
            swaps: snap.swaps,
        });
        Ok(())
    }

    /// Restores every session in the file at `path`.
    pub fn load_snapshot(&self, path: &Path) -> Result<usize, SnapshotError> {
        let text = std::fs::read_to_string(path)?;
        let all: Vec<SessionSnapshot> = serde_json::from_str(&text)?;
        let count = all.len();
        for snap in all {
            self.restore(snap)?;
        }
        Ok(count)
    }
}
