//! Session server for semiom.
//!
//! [`Store`] holds the loaded packs and the live sessions and implements every
//! operation; [`router`] exposes it over HTTP with JSON bodies. Writes use
//! optimistic concurrency: each session carries a revision that grows by one
//! per accepted move or pack swap, and a write naming a stale revision is
//! rejected.

mod error;
mod http;
mod snapshot;
mod store;

pub use error::ServiceError;
pub use http::{router, serve, Background};
pub use snapshot::{SessionSnapshot, SnapshotError};
pub use store::{Handle, LegalView, PackInfo, PackLoadError, Registry, Store};
