//! The native, metaphor-free interface of the program: a structured
//! conversation between the user and the system.
//!
//! ```text
//! Idle --Summon--> Summoned --Offer--> OfferMade --StateNeed--> NeedStated
//!                     |                                            |
//!                     +--DeclineGeneral--> DeclinedGeneral         +--DeclineSpecific--> DeclinedSpecific
//!                                                                  |
//!                                                                  +--ConfirmCapability--> CapabilityConfirmed
//!
//! CapabilityConfirmed --ProvideDetail--> DetailProvided --Resolve--> Resolved
//! Resolved --Close--> Closed
//! Resolved --StateNeed--> NeedStated   (another request in the same session)
//! ```
//!
//! Users submit their moves; every system move is generated synchronously
//! and deterministically in reply. The system declines in general when its
//! anchor has nothing to offer or cannot name everything in the workspace,
//! and declines a specific request when the requested action does not apply
//! at the requested focus.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{run_program, AlgebraProgram, Bindings, NodeCategory, NodeId, Workspace};
use crate::anchor::{instantiate, AnchorError, SlotSpec};
use crate::pack::{LocalePack, ValidationReport};

/// Catalog keys the conversation needs, with the arguments supplied to each.
pub mod keys {
    pub const SUMMON: &str = "conversation.summon";
    pub const OFFER: &str = "conversation.offer";
    pub const STATE_NEED: &str = "conversation.state-need";
    pub const CONFIRM: &str = "conversation.confirm";
    pub const DETAIL: &str = "conversation.detail";
    pub const RESOLVED: &str = "conversation.resolved";
    pub const FAILED: &str = "conversation.failed";
    pub const CLOSE: &str = "conversation.close";
    pub const DECLINE_GENERAL: &str = "decline.general";
    pub const DECLINE_SPECIFIC: &str = "decline.specific";

    /// Every key and the placeholder names the engine can fill in.
    pub const ALL: [(&str, &[&str]); 10] = [
        (SUMMON, &[]),
        (OFFER, &[]),
        (STATE_NEED, &["action", "object"]),
        (CONFIRM, &["action", "object"]),
        (DETAIL, &["action", "object", "details"]),
        (RESOLVED, &["action", "object"]),
        (FAILED, &["action", "object"]),
        (CLOSE, &[]),
        (DECLINE_GENERAL, &[]),
        (DECLINE_SPECIFIC, &["action", "object"]),
    ];

    /// Optional keys for errors reported to clients over the wire. Packs may
    /// translate them; none takes placeholders.
    pub const ERRORS: [&str; 8] = [
        "error.unknown-pack",
        "error.unknown-session",
        "error.unknown-manifest",
        "error.unknown-node",
        "error.revision-conflict",
        "error.illegal-move",
        "error.incompatible-anchor",
        "error.bad-request",
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    User,
    System,
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Actor::User => "user",
            Actor::System => "system",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Summoned,
    OfferMade,
    NeedStated,
    CapabilityConfirmed,
    DetailProvided,
    Resolved,
    DeclinedGeneral,
    DeclinedSpecific,
    Closed,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Resolved | Phase::DeclinedGeneral | Phase::DeclinedSpecific | Phase::Closed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args", rename_all = "snake_case")]
pub enum MoveKind {
    Summon,
    Offer,
    DeclineGeneral { reason: String },
    StateNeed {
        need: String,
        /// Node the request is about; the root when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        focus: Option<NodeId>,
    },
    ConfirmCapability,
    DeclineSpecific { reason: String },
    ProvideDetail {
        #[serde(default)]
        bindings: Bindings,
    },
    Resolve { program: AlgebraProgram, outcome: Outcome },
    Close,
}

impl MoveKind {
    /// The only actor allowed to make this move.
    pub fn actor(&self) -> Actor {
        match self {
            MoveKind::Summon | MoveKind::StateNeed { .. } | MoveKind::ProvideDetail { .. } | MoveKind::Close => {
                Actor::User
            }
            _ => Actor::System,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MoveKind::Summon => "summon",
            MoveKind::Offer => "offer",
            MoveKind::DeclineGeneral { .. } => "decline_general",
            MoveKind::StateNeed { .. } => "state_need",
            MoveKind::ConfirmCapability => "confirm_capability",
            MoveKind::DeclineSpecific { .. } => "decline_specific",
            MoveKind::ProvideDetail { .. } => "provide_detail",
            MoveKind::Resolve { .. } => "resolve",
            MoveKind::Close => "close",
        }
    }
}

fn default_actor() -> Actor {
    Actor::User
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    #[serde(default = "default_actor")]
    pub actor: Actor,
    #[serde(flatten)]
    pub kind: MoveKind,
}

impl Move {
    pub fn user(kind: MoveKind) -> Self {
        Move { actor: Actor::User, kind }
    }

    pub fn system(kind: MoveKind) -> Self {
        Move { actor: Actor::System, kind }
    }

    pub fn summon() -> Self {
        Move::user(MoveKind::Summon)
    }

    pub fn state_need(need: &str, focus: Option<NodeId>) -> Self {
        Move::user(MoveKind::StateNeed { need: need.to_owned(), focus })
    }

    pub fn provide_detail(bindings: Bindings) -> Self {
        Move::user(MoveKind::ProvideDetail { bindings })
    }

    pub fn close() -> Self {
        Move::user(MoveKind::Close)
    }
}

/// A move as it appears in a serialized transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub seq: usize,
    #[serde(flatten)]
    pub mv: Move,
}

pub fn transcript_to_records(transcript: &[Move]) -> Vec<MoveRecord> {
    transcript.iter().enumerate().map(|(seq, mv)| MoveRecord { seq, mv: mv.clone() }).collect()
}

pub fn transcript_from_records(records: Vec<MoveRecord>) -> Vec<Move> {
    let mut records = records;
    records.sort_by_key(|r| r.seq);
    records.into_iter().map(|r| r.mv).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args", rename_all = "snake_case")]
pub enum TemplateKind {
    Summon,
    Offer,
    DeclineGeneral,
    StateNeed {
        need: String,
        /// Nodes at which the system would confirm this need.
        enabled_at: Vec<NodeId>,
    },
    ConfirmCapability,
    DeclineSpecific,
    ProvideDetail { action: String, slots: Vec<SlotSpec> },
    Resolve,
    Close,
}

/// One entry of [`Session::legal_moves`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveTemplate {
    pub actor: Actor,
    #[serde(flatten)]
    pub kind: TemplateKind,
}

impl MoveTemplate {
    /// Whether `mv` instantiates this template (ignoring argument values
    /// other than the stated need).
    pub fn matches(&self, mv: &Move) -> bool {
        if self.actor != mv.actor {
            return false;
        }
        match (&self.kind, &mv.kind) {
            (TemplateKind::StateNeed { need, .. }, MoveKind::StateNeed { need: asked, .. }) => need == asked,
            (TemplateKind::ProvideDetail { .. }, MoveKind::ProvideDetail { .. }) => true,
            (t, m) => template_name(t) == m.name(),
        }
    }
}

fn template_name(kind: &TemplateKind) -> &'static str {
    match kind {
        TemplateKind::Summon => "summon",
        TemplateKind::Offer => "offer",
        TemplateKind::DeclineGeneral => "decline_general",
        TemplateKind::StateNeed { .. } => "state_need",
        TemplateKind::ConfirmCapability => "confirm_capability",
        TemplateKind::DeclineSpecific => "decline_specific",
        TemplateKind::ProvideDetail { .. } => "provide_detail",
        TemplateKind::Resolve => "resolve",
        TemplateKind::Close => "close",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConversationError {
    #[error("the locale pack is not valid ({} errors)", .0.errors().count())]
    InvalidPack(ValidationReport),
    #[error("`{kind}` is not a legal move in phase {phase:?}")]
    IllegalMove { phase: Phase, kind: String },
    #[error("`{kind}` must be made by the {expected}")]
    WrongActor { kind: String, expected: Actor },
    #[error("the anchor has no action `{0}`")]
    UnknownNeed(String),
    #[error("unknown focus node {0}")]
    UnknownNode(NodeId),
    #[error("slot `{0}` is unbound")]
    UnboundSlot(String),
    #[error("invalid detail: {0}")]
    BadDetail(AnchorError),
    #[error("replay diverged at move {at}")]
    ReplayDivergence { at: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SwapError {
    #[error("the locale pack is not valid ({} errors)", .0.errors().count())]
    InvalidPack(ValidationReport),
    #[error("the anchor has no word for {}", display_categories(.uncovered))]
    IncompatibleAnchor { uncovered: Vec<NodeCategory> },
    #[error("the anchor lacks the pending action `{0}`")]
    PendingAction(String),
}

fn display_categories(categories: &[NodeCategory]) -> String {
    categories.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingNeed {
    pub action: String,
    pub focus: NodeId,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pack: Arc<LocalePack>,
    initial: Workspace,
    workspace: Workspace,
    phase: Phase,
    transcript: Vec<Move>,
    pending_need: Option<PendingNeed>,
    pending_bindings: Option<Bindings>,
}

impl Session {
    /// Starts an idle conversation over `ws`. The pack must validate without
    /// errors.
    pub fn new(pack: Arc<LocalePack>, ws: Workspace) -> Result<Session, ConversationError> {
        let report = pack.validate();
        if report.has_errors() {
            return Err(ConversationError::InvalidPack(report));
        }
        Ok(Session {
            id: "session".to_owned(),
            pack,
            initial: ws.clone(),
            workspace: ws,
            phase: Phase::Idle,
            transcript: Vec::new(),
            pending_need: None,
            pending_bindings: None,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn pack(&self) -> &Arc<LocalePack> {
        &self.pack
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn initial_workspace(&self) -> &Workspace {
        &self.initial
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn transcript(&self) -> &[Move] {
        &self.transcript
    }

    pub fn pending_need(&self) -> Option<&PendingNeed> {
        self.pending_need.as_ref()
    }

    pub fn pending_bindings(&self) -> Option<&Bindings> {
        self.pending_bindings.as_ref()
    }

    /// Continues the conversation under another pack. Workspace, transcript
    /// and phase carry over unchanged.
    pub fn swap_pack(&self, pack: Arc<LocalePack>) -> Result<Session, SwapError> {
        let report = pack.validate();
        if report.has_errors() {
            return Err(SwapError::InvalidPack(report));
        }
        let uncovered = pack.anchor.uncovered(&self.workspace);
        if !uncovered.is_empty() {
            return Err(SwapError::IncompatibleAnchor { uncovered });
        }
        if let Some(pending) = &self.pending_need {
            if pack.anchor.action(&pending.action).is_none() {
                return Err(SwapError::PendingAction(pending.action.clone()));
            }
        }
        let mut next = self.clone();
        next.pack = pack;
        Ok(next)
    }

    fn state_need_templates(&self) -> Vec<MoveTemplate> {
        let anchor = &self.pack.anchor;
        anchor
            .actions
            .iter()
            .map(|action| {
                let enabled_at = self
                    .workspace
                    .nodes()
                    .filter(|n| action.applies.holds(n.category(), n.id == self.workspace.root()))
                    .map(|n| n.id)
                    .collect();
                MoveTemplate {
                    actor: Actor::User,
                    kind: TemplateKind::StateNeed { need: action.id.clone(), enabled_at },
                }
            })
            .collect()
    }

    /// The moves accepted in the current phase.
    pub fn legal_moves(&self) -> Vec<MoveTemplate> {
        let user = |kind| MoveTemplate { actor: Actor::User, kind };
        let system = |kind| MoveTemplate { actor: Actor::System, kind };
        match self.phase {
            Phase::Idle => vec![user(TemplateKind::Summon)],
            Phase::Summoned => vec![system(TemplateKind::Offer), system(TemplateKind::DeclineGeneral)],
            Phase::OfferMade => self.state_need_templates(),
            Phase::NeedStated => vec![system(TemplateKind::ConfirmCapability), system(TemplateKind::DeclineSpecific)],
            Phase::CapabilityConfirmed => {
                let pending = self.pending_need.as_ref().expect("a confirmed capability has a pending need");
                let slots = self.pack.anchor.action(&pending.action).map(|a| a.slots.clone()).unwrap_or_default();
                vec![user(TemplateKind::ProvideDetail { action: pending.action.clone(), slots })]
            }
            Phase::DetailProvided => vec![system(TemplateKind::Resolve)],
            Phase::Resolved => {
                let mut moves = vec![user(TemplateKind::Close)];
                moves.extend(self.state_need_templates());
                moves
            }
            Phase::DeclinedGeneral | Phase::DeclinedSpecific | Phase::Closed => Vec::new(),
        }
    }

    /// Applies a user move and returns the new session together with the
    /// system's replies, which are already appended to its transcript.
    pub fn submit_move(&self, mv: Move) -> Result<(Session, Vec<Move>), ConversationError> {
        let kind_name = mv.kind.name().to_owned();
        if mv.actor != mv.kind.actor() {
            return Err(ConversationError::WrongActor { kind: kind_name, expected: mv.kind.actor() });
        }
        if mv.actor == Actor::System {
            // System moves are generated by the engine, never submitted.
            return Err(ConversationError::WrongActor { kind: kind_name, expected: Actor::System });
        }
        let illegal = || ConversationError::IllegalMove { phase: self.phase, kind: kind_name.clone() };

        let mut next = self.clone();
        let mut replies = Vec::new();
        match (&mv.kind, self.phase) {
            (MoveKind::Summon, Phase::Idle) => {
                next.transcript.push(mv.clone());
                next.phase = Phase::Summoned;
                let anchor = &self.pack.anchor;
                let reply = if !anchor.actions.is_empty() && anchor.covers(&self.workspace) {
                    next.phase = Phase::OfferMade;
                    MoveKind::Offer
                } else {
                    next.phase = Phase::DeclinedGeneral;
                    MoveKind::DeclineGeneral { reason: keys::DECLINE_GENERAL.to_owned() }
                };
                replies.push(Move::system(reply));
            }
            (MoveKind::StateNeed { need, focus }, Phase::OfferMade | Phase::Resolved) => {
                let action =
                    self.pack.anchor.action(need).ok_or_else(|| ConversationError::UnknownNeed(need.clone()))?;
                let focus = focus.unwrap_or(self.workspace.root());
                let category =
                    self.workspace.category(focus).map_err(|_| ConversationError::UnknownNode(focus))?;
                next.transcript.push(mv.clone());
                next.phase = Phase::NeedStated;
                next.pending_bindings = None;
                let reply = if action.applies.holds(category, focus == self.workspace.root()) {
                    next.phase = Phase::CapabilityConfirmed;
                    next.pending_need = Some(PendingNeed { action: need.clone(), focus });
                    MoveKind::ConfirmCapability
                } else {
                    next.phase = Phase::DeclinedSpecific;
                    next.pending_need = None;
                    MoveKind::DeclineSpecific { reason: keys::DECLINE_SPECIFIC.to_owned() }
                };
                replies.push(Move::system(reply));
            }
            (MoveKind::ProvideDetail { bindings }, Phase::CapabilityConfirmed) => {
                let pending = self.pending_need.as_ref().expect("a confirmed capability has a pending need");
                let action = self.pack.anchor.action(&pending.action).ok_or_else(illegal)?;
                let program = instantiate(action, bindings, &self.workspace, pending.focus).map_err(|e| match e {
                    AnchorError::UnboundSlot(slot) => ConversationError::UnboundSlot(slot),
                    other => ConversationError::BadDetail(other),
                })?;
                next.transcript.push(mv.clone());
                next.phase = Phase::DetailProvided;
                next.pending_bindings = Some(bindings.clone());
                let outcome = match run_program(&self.workspace, &program, bindings) {
                    Ok(ws) => {
                        next.workspace = ws;
                        Outcome::Ok
                    }
                    Err(_) => Outcome::Error,
                };
                next.phase = Phase::Resolved;
                next.pending_need = None;
                replies.push(Move::system(MoveKind::Resolve { program, outcome }));
            }
            (MoveKind::Close, Phase::Resolved) => {
                next.transcript.push(mv.clone());
                next.phase = Phase::Closed;
            }
            _ => return Err(illegal()),
        }
        next.transcript.extend(replies.iter().cloned());
        Ok((next, replies))
    }
}

/// Rebuilds a session by resubmitting the user moves of `transcript` and
/// checking that the engine answers exactly as recorded.
pub fn replay(pack: Arc<LocalePack>, ws0: Workspace, transcript: &[Move]) -> Result<Session, ConversationError> {
    resume(Session::new(pack, ws0)?, transcript)
}

/// Like [`replay`], but continues from an existing session. Divergence
/// offsets are relative to `moves`.
pub fn resume(mut session: Session, moves: &[Move]) -> Result<Session, ConversationError> {
    let transcript = moves;
    let mut at = 0;
    while at < transcript.len() {
        let mv = &transcript[at];
        if mv.actor == Actor::System {
            return Err(ConversationError::ReplayDivergence { at });
        }
        let (next, replies) = session.submit_move(mv.clone())?;
        for (offset, reply) in replies.iter().enumerate() {
            if transcript.get(at + 1 + offset) != Some(reply) {
                return Err(ConversationError::ReplayDivergence { at: at + 1 + offset });
            }
        }
        at += 1 + replies.len();
        session = next;
    }
    Ok(session)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Value;
    use crate::bundled;

    fn office() -> Session {
        Session::new(bundled::office(), Workspace::new()).unwrap()
    }

    fn name(n: &str) -> Bindings {
        Bindings::from([("name".to_owned(), Value::Name(n.to_owned()))])
    }

    #[test]
    fn idle_lists_summon_only() {
        let s = office();
        assert_eq!(s.phase(), Phase::Idle);
        assert_eq!(s.legal_moves(), vec![MoveTemplate { actor: Actor::User, kind: TemplateKind::Summon }]);
    }

    #[test]
    fn summon_is_answered_with_an_offer() {
        let (s, replies) = office().submit_move(Move::summon()).unwrap();
        assert_eq!(replies, vec![Move::system(MoveKind::Offer)]);
        assert_eq!(s.phase(), Phase::OfferMade);
        assert_eq!(s.transcript().len(), 2);
    }

    #[test]
    fn summoned_phase_lists_offer_and_general_decline() {
        let mut s = office();
        s.phase = Phase::Summoned;
        let kinds: Vec<_> = s.legal_moves().into_iter().map(|t| (t.actor, t.kind)).collect();
        assert_eq!(kinds, vec![(Actor::System, TemplateKind::Offer), (Actor::System, TemplateKind::DeclineGeneral)]);
    }

    #[test]
    fn full_flow_creates_a_document() {
        let (s, _) = office().submit_move(Move::summon()).unwrap();
        let (s, replies) = s.submit_move(Move::state_need("new-document", None)).unwrap();
        assert_eq!(replies, vec![Move::system(MoveKind::ConfirmCapability)]);
        let (s, replies) = s.submit_move(Move::provide_detail(name("draft"))).unwrap();
        assert!(matches!(&replies[..], [Move { kind: MoveKind::Resolve { outcome: Outcome::Ok, .. }, .. }]));
        assert_eq!(s.phase(), Phase::Resolved);
        assert!(s.workspace().child_named(s.workspace().root(), "draft").is_some());
        let (s, replies) = s.submit_move(Move::close()).unwrap();
        assert!(replies.is_empty());
        assert_eq!(s.phase(), Phase::Closed);
        assert!(s.legal_moves().is_empty());
    }

    #[test]
    fn inapplicable_need_is_declined_specifically() {
        let (s, _) = office().submit_move(Move::summon()).unwrap();
        // "open" needs an artifact; the root is a container.
        let (s, replies) = s.submit_move(Move::state_need("open", None)).unwrap();
        assert_eq!(
            replies,
            vec![Move::system(MoveKind::DeclineSpecific { reason: keys::DECLINE_SPECIFIC.into() })]
        );
        assert_eq!(s.phase(), Phase::DeclinedSpecific);
        assert!(s.legal_moves().is_empty());
    }

    #[test]
    fn uncovered_workspace_is_declined_in_general() {
        let ws = Workspace::new();
        let (ws, _) = ws.create_artifact(ws.root(), crate::algebra::ArtifactKind::Audio, "song").unwrap();
        let s = Session::new(bundled::paper_tray(), ws.clone()).unwrap();
        let (s, replies) = s.submit_move(Move::summon()).unwrap();
        assert_eq!(replies, vec![Move::system(MoveKind::DeclineGeneral { reason: keys::DECLINE_GENERAL.into() })]);
        assert_eq!(s.phase(), Phase::DeclinedGeneral);
        assert_eq!(s.workspace().to_canonical_json(), ws.to_canonical_json());
    }

    #[test]
    fn wrong_actor_and_illegal_moves_leave_session_unchanged() {
        let s = office();
        let before = (s.phase(), s.transcript().len());
        assert!(matches!(
            s.submit_move(Move::user(MoveKind::Offer)),
            Err(ConversationError::WrongActor { .. })
        ));
        assert!(matches!(
            s.submit_move(Move::system(MoveKind::Offer)),
            Err(ConversationError::WrongActor { .. })
        ));
        assert!(matches!(s.submit_move(Move::close()), Err(ConversationError::IllegalMove { .. })));
        assert_eq!((s.phase(), s.transcript().len()), before);
    }

    #[test]
    fn need_and_detail_errors() {
        let (s, _) = office().submit_move(Move::summon()).unwrap();
        assert_eq!(
            s.submit_move(Move::state_need("fly", None)).unwrap_err(),
            ConversationError::UnknownNeed("fly".into())
        );
        assert_eq!(
            s.submit_move(Move::state_need("open", Some(NodeId(42)))).unwrap_err(),
            ConversationError::UnknownNode(NodeId(42))
        );
        let (s, _) = s.submit_move(Move::state_need("new-folder", None)).unwrap();
        assert_eq!(
            s.submit_move(Move::provide_detail(Bindings::new())).unwrap_err(),
            ConversationError::UnboundSlot("name".into())
        );
    }

    #[test]
    fn failed_resolution_keeps_workspace() {
        let ws = Workspace::new();
        let (ws, _) = ws.create_artifact(ws.root(), crate::algebra::ArtifactKind::Text, "draft").unwrap();
        let s = Session::new(bundled::office(), ws.clone()).unwrap();
        let (s, _) = s.submit_move(Move::summon()).unwrap();
        let (s, _) = s.submit_move(Move::state_need("new-document", None)).unwrap();
        let (s, replies) = s.submit_move(Move::provide_detail(name("draft"))).unwrap();
        assert!(matches!(&replies[..], [Move { kind: MoveKind::Resolve { outcome: Outcome::Error, .. }, .. }]));
        assert_eq!(s.workspace().to_canonical_json(), ws.to_canonical_json());
        // The loop back to another request.
        let (s, _) = s.submit_move(Move::state_need("new-document", None)).unwrap();
        assert_eq!(s.phase(), Phase::CapabilityConfirmed);
    }

    #[test]
    fn sessions_are_independent() {
        let a = office();
        let b = office();
        let (a, _) = a.submit_move(Move::summon()).unwrap();
        let (a, _) = a.submit_move(Move::state_need("new-folder", None)).unwrap();
        let (a, _) = a.submit_move(Move::provide_detail(name("x"))).unwrap();
        assert_eq!(a.workspace().len(), 2);
        assert_eq!(b.workspace().len(), 1);
    }

    #[test]
    fn replay_reproduces_and_detects_tampering() {
        let (s, _) = office().submit_move(Move::summon()).unwrap();
        let (s, _) = s.submit_move(Move::state_need("new-folder", None)).unwrap();
        let (s, _) = s.submit_move(Move::provide_detail(name("x"))).unwrap();
        let again = replay(bundled::office(), Workspace::new(), s.transcript()).unwrap();
        assert_eq!(again.phase(), s.phase());
        assert_eq!(again.workspace().to_canonical_json(), s.workspace().to_canonical_json());

        let empty = replay(bundled::office(), Workspace::new(), &[]).unwrap();
        assert_eq!(empty.phase(), Phase::Idle);

        for skip in 0..s.transcript().len() {
            let mut tampered = s.transcript().to_vec();
            tampered.remove(skip);
            let err = replay(bundled::office(), Workspace::new(), &tampered).unwrap_err();
            assert!(matches!(
                err,
                ConversationError::ReplayDivergence { .. } | ConversationError::IllegalMove { .. }
            ));
        }
    }

    #[test]
    fn swapping_packs_keeps_state() {
        let ws = Workspace::new();
        let (ws, _) = ws.make_container(ws.root(), "f").unwrap();
        let (s, _) = Session::new(bundled::office(), ws.clone()).unwrap().submit_move(Move::summon()).unwrap();
        let swapped = s.swap_pack(bundled::warehouse()).unwrap();
        assert_eq!(swapped.workspace().to_canonical_json(), ws.to_canonical_json());
        assert_eq!(swapped.transcript(), s.transcript());
        assert_eq!(swapped.phase(), s.phase());
        assert!(swapped.legal_moves().iter().any(|t| matches!(&t.kind, TemplateKind::StateNeed { need, .. } if need == "break-box")));

        let (ws, _) = ws.make_link(NodeId(1), ws.root(), "l").unwrap();
        let s = Session::new(bundled::office(), ws).unwrap();
        assert_eq!(
            s.swap_pack(bundled::paper_tray()).unwrap_err(),
            SwapError::IncompatibleAnchor { uncovered: vec![NodeCategory::Link] }
        );

        let (s, _) = office().submit_move(Move::summon()).unwrap();
        let (s, _) = s.submit_move(Move::state_need("new-document", None)).unwrap();
        assert_eq!(s.swap_pack(bundled::warehouse()).unwrap_err(), SwapError::PendingAction("new-document".into()));
    }

    #[test]
    fn move_wire_format() {
        let mv = Move::state_need("open", Some(NodeId(3)));
        let json = serde_json::to_string(&MoveRecord { seq: 2, mv: mv.clone() }).unwrap();
        assert_eq!(json, r#"{"seq":2,"actor":"user","kind":"state_need","args":{"need":"open","focus":3}}"#);
        let back: MoveRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.mv, mv);
        let summon: Move = serde_json::from_str(r#"{"kind":"summon"}"#).unwrap();
        assert_eq!(summon, Move::summon());
        assert_eq!(serde_json::to_string(&Move::system(MoveKind::Offer)).unwrap(), r#"{"actor":"system","kind":"offer"}"#);
    }
}
