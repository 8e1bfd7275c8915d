//! Tomographic detection of quantum correlations and spin squeezing in
//! small qubit registers.

pub mod circuits;
pub mod error;
pub mod experiments;
pub mod indicators;
pub mod measures;
pub mod optimize;
pub mod qmath;
pub mod random;
pub mod report;
pub mod spin;
pub mod squeezing;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
