//! Acceptance criteria for `fracpk` live in `tests/acceptance.rs`.
