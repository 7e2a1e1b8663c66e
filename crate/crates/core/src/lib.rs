//! Solver and symmetry diagnostics for the p-torsion problem
//! `-div(|grad u|^{p-2} grad u) = 1` with zero Dirichlet data on smooth
//! planar domains, `1 < p <= 2`.

pub mod closed_forms;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod pipeline;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
