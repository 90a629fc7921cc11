//! Holds the acceptance runner in `tests/acceptance.rs`; run it with
//! `cargo test -p otstruct-validation --test acceptance`.
