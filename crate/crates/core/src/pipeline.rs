//! Domain in, solution and report out.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{diagnose, DeficitReport, DiagnoseOptions};
use crate::error::Result;
use crate::geometry::{triangulate, BoundaryCurve, DomainConfig, Mesh};
use crate::solver::{solve_torsion, Solution, SolveConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub p: f64,
    pub h: f64,
    #[serde(default)]
    pub solve: Option<SolveConfig>,
    #[serde(default = "default_delta")]
    pub delta_crit: f64,
    #[serde(default)]
    pub tol_deficit: Option<f64>,
}

fn default_delta() -> f64 {
    crate::diagnostics::report::DEFAULT_DELTA_CRIT
}

impl RunConfig {
    pub fn new(domain: impl Into<DomainConfig>, p: f64, h: f64) -> Self {
        RunConfig { domain: domain.into(), p, h, solve: None, delta_crit: default_delta(), tol_deficit: None }
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig { p: self.p, ..self.solve.clone().unwrap_or_default() }
    }

    pub fn diagnose_options(&self) -> DiagnoseOptions {
        DiagnoseOptions { delta_crit: self.delta_crit, tol_deficit: self.tol_deficit }
    }
}

pub struct Prepared {
    pub curve: BoundaryCurve,
    pub mesh: Mesh,
}

pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.domain.spec.validate()?;
    crate::closed_forms::check_exponent(config.p)?;
    let curve = BoundaryCurve::new(&config.domain.spec)?;
    let mesh = triangulate(&curve, config.h)?;
    Ok(Prepared { curve, mesh })
}

pub struct RunOutput {
    pub prepared: Prepared,
    pub solution: Solution,
    pub report: DeficitReport,
}

/// Meshes, solves and diagnoses in one go.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let prepared = prepare(config)?;
    let solution = solve_torsion(&prepared.mesh, &config.solve_config())?;
    let report = diagnose(
        &config.domain,
        &prepared.curve,
        &prepared.mesh,
        &solution.u,
        config.p,
        &config.diagnose_options(),
    )?;
    Ok(RunOutput { prepared, solution, report })
}
