//! Symmetry diagnostics of a solved field: the P-function, boundary traces,
//! the deficit integral, the integral identity and the bounds on the deficit.

pub mod integrals;
pub mod newton;
pub mod pfunction;
pub mod report;
pub mod traces;

pub use integrals::{
    bound_ii, bound_iii, deficit_integral, deficit_integrand, identity_check, p_laplacian, stability_bound, Deficit,
    IdentitySides,
};
pub use newton::{newton_gap, newton_gap2};
pub use pfunction::{p_function_field, PFunctionSummary};
pub use report::{
    curvature_mass_check, default_tol_deficit, diagnose, sbt_tolerances, DeficitReport, DiagnoseOptions, SbtBlock,
    SbtDeviations,
};
pub use traces::{boundary_traces, BoundaryTraces, TraceSample};
