//! Recovery maps for approximate quantum Markov chains.
//!
//! The crate computes conditional mutual information, Petz and rotated-Petz
//! recovery channels, fidelity of recovery by semidefinite programming, and
//! measured relative entropy for finite-dimensional tripartite states.

pub mod entropy;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod recovery;
pub mod sdp;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DimVector};
pub use states::{DensityMatrix, TripartiteLabels};
