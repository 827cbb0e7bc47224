//! Acceptance gate for the semiom workspace. The checks live in
//! `tests/acceptance.rs`; run them with `cargo test -p semiom-acceptance`.
