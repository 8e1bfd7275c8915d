//! Acceptance checks for the spintomo workspace; see `tests/acceptance.rs`.
