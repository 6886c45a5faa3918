//! Acceptance checks live in `tests/acceptance.rs`; run with
//! `cargo test -p polarforge-validation --test acceptance`.
