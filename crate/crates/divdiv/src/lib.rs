//! Convergence studies, verification checks and file formats around
//! [`divdiv_core`].

pub mod checks;
pub mod error;
pub mod meshio;
pub mod mtx;
pub mod parallel;
pub mod report;
pub mod study;

pub use divdiv_core as core;
pub use error::{Error, Result};
