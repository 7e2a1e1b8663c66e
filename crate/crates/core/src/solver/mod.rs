//! Piecewise-linear solver for the p-torsion problem.
//!
//! The discrete energy is minimized with the gradient regularized as
//! `(|grad u|^2 + eps^2)^{p/2}`; eps is driven down a geometric schedule and
//! each stage is solved by damped Newton warm-started from the previous one.

pub mod assembly;
pub mod io;
pub mod linear;
pub mod recovery;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::closed_forms::check_exponent;
use crate::error::{Error, Result};
use crate::geometry::{Mesh, Vec2};
use crate::quadrature::sum;

pub use assembly::Discretization;
pub use recovery::{averaged_vertex_gradients, recover, Recovered};

/// Triangles with `|grad u|` below this fraction of the maximum count toward
/// the reported critical area.
pub const CRITICAL_FRACTION: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub p: f64,
    pub eps0: f64,
    /// Each stage divides eps by this factor.
    pub eps_ratio: f64,
    pub eps_min: f64,
    /// Stop a stage once the energy gradient norm, relative to the load
    /// norm, is at most this.
    pub tol_grad: f64,
    pub max_iter: usize,
    pub backtrack: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            p: 2.0,
            eps0: 0.1,
            eps_ratio: 4.0,
            eps_min: 1e-8,
            tol_grad: 1e-9,
            max_iter: 100,
            backtrack: 0.5,
            armijo: 1e-4,
            max_backtracks: 50,
        }
    }
}

impl SolveConfig {
    pub fn with_p(p: f64) -> Self {
        SolveConfig { p, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p)?;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.eps_min > 0.0 && self.eps0 >= self.eps_min) {
            return bad(format!("need eps0 >= eps_min > 0, got eps0 = {}, eps_min = {}", self.eps0, self.eps_min));
        }
        if !(self.eps_ratio > 1.0) {
            return bad(format!("eps_ratio must exceed 1, got {}", self.eps_ratio));
        }
        if !(self.tol_grad > 0.0) {
            return bad(format!("tol_grad must be positive, got {}", self.tol_grad));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0 && self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("line-search factors must lie in (0,1)".into());
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        Ok(())
    }

    /// Strictly decreasing regularization schedule ending at `eps_min`.
    /// For `p = 2` the energy does not depend on eps and one stage is used.
    pub fn schedule(&self) -> Vec<f64> {
        if self.p == 2.0 {
            return vec![self.eps_min];
        }
        let mut out = Vec::new();
        let mut eps = self.eps0;
        while eps > self.eps_min {
            out.push(eps);
            eps /= self.eps_ratio;
        }
        out.push(self.eps_min);
        out
    }
}

/// Nodal values on a mesh; zero on boundary vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(n: usize) -> Self {
        ScalarField { values: vec![0.0; n] }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub eps: f64,
    pub iterations: usize,
    pub energy: f64,
    pub grad_norm: f64,
    /// Weak residual of the unregularized equation at the end of the stage.
    pub residual: f64,
    /// Energy after each accepted step, starting with the initial value.
    pub energy_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: SolveConfig,
    pub vertices: usize,
    pub triangles: usize,
    pub stages: Vec<StageReport>,
    pub total_iterations: usize,
    pub final_energy: f64,
    pub residual: f64,
    pub eps_floor: f64,
    pub max_value: f64,
    pub critical_area: f64,
    pub critical_threshold: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub u: ScalarField,
    pub report: SolveReport,
}

fn norm(v: &[f64]) -> f64 {
    sum(v.iter().map(|x| x * x)).sqrt()
}

/// Minimizes the discrete energy on `mesh`.
pub fn solve_torsion(mesh: &Mesh, config: &SolveConfig) -> Result<Solution> {
    config.validate()?;
    let p = config.p;
    let disc = Discretization::new(mesh);
    let load_norm = disc.load_norm();
    let mut u = ScalarField::zeros(mesh.vertex_count());
    let mut stages = Vec::new();
    let mut total_iterations = 0;

    for eps in config.schedule() {
        let mut trace = String::new();
        let mut history = vec![disc.energy(p, eps, &u)?];
        let mut iterations = 0;
        let grad_norm = loop {
            let g = disc.reduced_gradient(&disc.energy_gradient(p, eps, &u)?);
            let rel = norm(&g) / load_norm;
            if rel <= config.tol_grad {
                break rel;
            }
            if iterations == config.max_iter {
                return Err(Error::IterationLimit { eps, grad_norm: rel });
            }
            let neg: Vec<f64> = g.iter().map(|x| -x).collect();
            let d = disc.hessian(p, eps, &u)?.solve(&neg)?;
            let slope: f64 = sum(g.iter().zip(&d).map(|(a, b)| a * b));
            let e0 = *history.last().unwrap();
            let step = |alpha: f64| {
                let mut trial = u.clone();
                for (v, dof) in disc.dof.iter().enumerate() {
                    if let Some(i) = dof {
                        trial.values[v] += alpha * d[*i];
                    }
                }
                trial
            };
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..config.max_backtracks {
                let trial = step(alpha);
                let e1 = disc.energy(p, eps, &trial)?;
                if e1 <= e0 + config.armijo * alpha * slope {
                    accepted = Some((trial, e1));
                    break;
                }
                alpha *= config.backtrack;
            }
            if accepted.is_none() {
                // Energy differences are below round-off here; fall back on
                // the gradient norm to judge the full Newton step.
                let trial = step(1.0);
                let g1 = norm(&disc.reduced_gradient(&disc.energy_gradient(p, eps, &trial)?)) / load_norm;
                if g1 < rel {
                    let e1 = disc.energy(p, eps, &trial)?;
                    alpha = 1.0;
                    accepted = Some((trial, e1));
                }
            }
            let _ = writeln!(trace, "  iter {iterations:3}: energy {e0:.16e}, |g| {rel:.3e}, slope {slope:.3e}, alpha {alpha:.3e}");
            match accepted {
                Some((trial, e1)) => {
                    u = trial;
                    history.push(e1);
                }
                None => return Err(Error::LineSearchStagnation { eps, iteration: iterations, trace }),
            }
            iterations += 1;
        };
        total_iterations += iterations;
        stages.push(StageReport {
            eps,
            iterations,
            energy: *history.last().unwrap(),
            grad_norm,
            residual: disc.residual(p, &u)?,
            energy_history: history,
        });
    }

    for (v, &val) in u.values.iter().enumerate() {
        if !mesh.is_boundary(v) && !(val > 0.0) {
            return Err(Error::MaximumPrinciple { vertex: v, value: val });
        }
    }

    let grads = disc.gradient_field(&u)?;
    let (critical_area, critical_threshold) = critical_area(&disc, &grads, CRITICAL_FRACTION);
    let last = stages.last().unwrap();
    let report = SolveReport {
        config: config.clone(),
        vertices: mesh.vertex_count(),
        triangles: mesh.triangles.len(),
        total_iterations,
        final_energy: last.energy,
        residual: last.residual,
        eps_floor: last.eps,
        max_value: u.max(),
        critical_area,
        critical_threshold,
        stages,
    };
    Ok(Solution { u, report })
}

/// Total area of triangles whose gradient norm is below `fraction` of the
/// largest one, and the absolute threshold used.
pub fn critical_area(disc: &Discretization, grads: &[Vec2], fraction: f64) -> (f64, f64) {
    let gmax = grads.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let threshold = fraction * gmax;
    let area = sum(grads.iter().enumerate().filter(|(_, g)| g.norm() < threshold).map(|(t, _)| disc.area[t]));
    (area, threshold)
}

/// Gradients, recovered vertex derivatives and gradient magnitudes of a
/// solved field.
#[derive(Clone, Debug)]
pub struct DerivedFields {
    pub triangle_gradient: Vec<Vec2>,
    pub triangle_gradient_norm: Vec<f64>,
    pub recovered: Recovered,
}

impl DerivedFields {
    pub fn compute(mesh: &Mesh, u: &ScalarField) -> Result<Self> {
        let disc = Discretization::new(mesh);
        let triangle_gradient = disc.gradient_field(u)?;
        let triangle_gradient_norm = triangle_gradient.iter().map(|g| g.norm()).collect();
        let recovered = recover(mesh, u)?;
        Ok(DerivedFields { triangle_gradient, triangle_gradient_norm, recovered })
    }
}
