//! Semiotic internationalization engine.
//!
//! A program exposes a metaphor-free [`algebra`] of workspace operations and
//! a structured [`conversation`] as its native interface. Locale [`pack`]s
//! supply an [`anchor`] (the metaphor a user already knows) and one or more
//! [`manifest`]s that decide how it appears on screen.

pub mod algebra;
pub mod anchor;
mod b64;
pub mod bundled;
pub mod conversation;
pub mod manifest;
pub mod pack;
