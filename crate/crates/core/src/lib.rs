//! Exact discrete optimal transport and the structure of its solution sets.
//!
//! Every cost is minimised: correlation is stored as `-<x, y>`, and dual
//! potentials follow the cost convention `phi_i + psi_j <= C_ij`.

pub mod analysis;
pub mod dualset;
pub mod error;
pub mod generators;
pub mod homotopy;
pub mod measure;
pub mod metrics;
pub mod problem;
pub mod solver;
pub mod structure;
pub mod tolerance;

pub use error::{OtError, Result};
pub use measure::DiscreteMeasure;
pub use problem::{CostMatrix, CostSpec, TransportProblem};
pub use solver::{solve, Coupling, DualPair, Solution};
pub use tolerance::Tolerances;
