//! Acceptance suite for the opcalc workspace. The criteria live in
//! `tests/acceptance.rs` and run with `cargo test -p opcalc-validation`.
