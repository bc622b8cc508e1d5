//! Long-range two-site quantum resources of the extended Ising / XXT chain
//! from its free-fermion solution, with decay-mode phase diagnostics and an
//! exact-diagonalization cross-check.

pub mod classify;
pub mod corr;
pub mod error;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod rdm;
pub mod resources;
pub mod topology;

pub use error::{Error, Result};
pub use model::{Axis, ModelParams};
