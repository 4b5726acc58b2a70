//! Adaptive simplicial meshes and stability of the L² projection onto
//! Lagrange and Crouzeix–Raviart finite element spaces.

pub mod dyadic;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod polyspace;
pub mod projection;
pub mod stability;

pub use error::{Error, Result};

/// Library version, embedded in every CLI output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
