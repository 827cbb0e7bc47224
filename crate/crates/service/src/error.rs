use semiom_core::algebra::NodeId;
use semiom_core::conversation::{ConversationError, SwapError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServiceError {
    #[error("unknown pack `{0}`")]
    UnknownPack(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("unknown manifest `{0}`")]
    UnknownManifest(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("expected revision {expected}, session is at {current}")]
    RevisionConflict { expected: u64, current: u64 },
    #[error(transparent)]
    IllegalMove(ConversationError),
    #[error(transparent)]
    IncompatibleAnchor(SwapError),
    #[error("bad request: {0}")]
    BadRequest(String),
}

/// Error body sent to clients. `message_key` names a catalog entry that packs
/// may translate; `message` is an English fallback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message_key: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub revision: Option<u64>,
}

impl ServiceError {
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownPack(_)
            | ServiceError::UnknownSession(_)
            | ServiceError::UnknownManifest(_)
            | ServiceError::UnknownNode(_) => 404,
            ServiceError::RevisionConflict { .. } => 409,
            ServiceError::IllegalMove(_) | ServiceError::IncompatibleAnchor(_) => 422,
            ServiceError::BadRequest(_) => 400,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownPack(_) => "unknown_pack",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownManifest(_) => "unknown_manifest",
            ServiceError::UnknownNode(_) => "unknown_node",
            ServiceError::RevisionConflict { .. } => "revision_conflict",
            ServiceError::IllegalMove(_) => "illegal_move",
            ServiceError::IncompatibleAnchor(_) => "incompatible_anchor",
            ServiceError::BadRequest(_) => "bad_request",
        }
    }

    pub fn message_key(&self) -> &'static str {
        match self {
            ServiceError::UnknownPack(_) => "error.unknown-pack",
            ServiceError::UnknownSession(_) => "error.unknown-session",
            ServiceError::UnknownManifest(_) => "error.unknown-manifest",
            ServiceError::UnknownNode(_) => "error.unknown-node",
            ServiceError::RevisionConflict { .. } => "error.revision-conflict",
            ServiceError::IllegalMove(_) => "error.illegal-move",
            ServiceError::IncompatibleAnchor(_) => "error.incompatible-anchor",
            ServiceError::BadRequest(_) => "error.bad-request",
        }
    }

    pub fn body(&self) -> ErrorBody {
        let revision = match self {
            ServiceError::RevisionConflict { current, .. } => Some(*current),
            _ => None,
        };
        ErrorBody { code: self.code(), message_key: self.message_key(), message: self.to_string(), revision }
    }
}
