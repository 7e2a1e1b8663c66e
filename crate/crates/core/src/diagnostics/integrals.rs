//! Volume and boundary integrals: the deficit, both sides of the integral
//! identity, and the boundary bounds on the deficit.

use nalgebra::Matrix2;
use serde::Serialize;

use crate::closed_forms::outer_annulus_factor;
use crate::diagnostics::newton::newton_gap2;
use crate::diagnostics::traces::BoundaryTraces;
use crate::error::{Error, Result};
use crate::geometry::{Mesh, Vec2};
use crate::quadrature::Summation;
use crate::solver::Recovered;

const N: usize = 2;

/// Prefactor `p(N-1)/(p-1)` of the boundary bounds.
pub fn bound_prefactor(p: f64) -> f64 {
    p * (N as f64 - 1.0) / (p - 1.0)
}

fn averaged<T: Copy + std::ops::Add<Output = T> + std::ops::Div<f64, Output = T>>(vals: &[T], tri: [usize; 3]) -> T {
    (vals[tri[0]] + vals[tri[1]] + vals[tri[2]]) / 3.0
}

/// Triangles kept by the critical-set cut `|grad u| >= delta * max |grad u|`.
pub fn kept_triangles(grads: &[Vec2], delta: f64) -> Vec<bool> {
    let gmax = grads.iter().map(|g| g.norm()).fold(0.0, f64::max);
    grads.iter().map(|g| g.norm() >= delta * gmax && g.norm() > 0.0).collect()
}

/// `|g|^{p-2} || (I + (p-2) n n^T) D |^2 - (tr of the same)^2 / N` with `n = g/|g|`,
/// i.e. `|g|^{2-p}` times the Newton gap of `|g|^{p-2} (I + (p-2) n n^T) D`.
pub fn deficit_integrand(p: f64, g: Vec2, hess: &Matrix2<f64>) -> f64 {
    let gn = g.norm();
    let n = g / gn;
    let a = (Matrix2::identity() + n * n.transpose() * (p - 2.0)) * hess;
    gn.powf(p - 2.0) * newton_gap2(&a)
}

/// `Delta_p u` from the trace form `|g|^{p-2} tr[(I + (p-2) n n^T) D]`.
pub fn p_laplacian(p: f64, g: Vec2, hess: &Matrix2<f64>) -> f64 {
    let gn = g.norm();
    let n = g / gn;
    gn.powf(p - 2.0) * ((Matrix2::identity() + n * n.transpose() * (p - 2.0)) * hess).trace()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deficit {
    pub value: f64,
    pub excluded_area: f64,
    pub delta_crit: f64,
    pub min_integrand: f64,
    /// Per-triangle integrand; `None` for excluded triangles.
    #[serde(skip)]
    pub integrand: Vec<Option<f64>>,
}

pub fn deficit_integral(
    mesh: &Mesh,
    grads: &[Vec2],
    recovered: &Recovered,
    p: f64,
    delta_crit: f64,
) -> Result<Deficit> {
    if !(delta_crit > 0.0) {
        return Err(Error::InvalidParameter(format!("delta_crit must be positive, got {delta_crit}")));
    }
    let keep = kept_triangles(grads, delta_crit);
    let mut total = Summation::default();
    let mut excluded = Summation::default();
    let mut integrand = Vec::with_capacity(grads.len());
    let mut min_integrand = f64::INFINITY;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t);
        if !keep[t] {
            excluded.add(area);
            integrand.push(None);
            continue;
        }
        let f = deficit_integrand(p, grads[t], &averaged(&recovered.hessian, *tri));
        min_integrand = min_integrand.min(f);
        total.add(area * f);
        integrand.push(Some(f));
    }
    Ok(Deficit { value: total.value(), excluded_area: excluded.value(), delta_crit, min_integrand, integrand })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentitySides {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_gap: f64,
    /// Left-hand side with the third-order term integrated by parts:
    /// `int |g|^{p-2} <g, grad Lap u> = -int Delta_p u Lap u + int_bdry Lap u |u_nu|^{p-2} u_nu`.
    pub lhs_by_parts: f64,
    /// Right-hand side recomputed from the `P_nu` form with `Delta_p u = -1`.
    pub rhs_pnu: f64,
    /// Half the boundary integral of `P_nu` from the traces `u_nu`, `u_nunu`.
    pub rhs_traces: f64,
}

pub fn identity_check(
    mesh: &Mesh,
    grads: &[Vec2],
    recovered: &Recovered,
    traces: &BoundaryTraces,
    p: f64,
    delta_crit: f64,
) -> IdentitySides {
    let nf = N as f64;
    let keep = kept_triangles(grads, delta_crit);
    let mut volume = Summation::default();
    let mut third = Summation::default();
    let mut by_parts = Summation::default();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if !keep[t] {
            continue;
        }
        let area = mesh.triangle_area(t);
        let hess = averaged(&recovered.hessian, *tri);
        let g = grads[t];
        let gn = g.norm();
        let n = g / gn;
        let grad_lap = averaged(&recovered.grad_laplacian, *tri);
        let w = (p - 1.0) * gn.powf(p - 2.0);
        volume.add(area * (w * ((p - 2.0) * (hess * n).norm_squared() + hess.norm_squared()) + hess.trace() / nf));
        third.add(area * w * g.dot(&grad_lap));
        by_parts.add(-area * hess.trace() * p_laplacian(p, g, &hess));
    }
    let boundary = traces.integrate(|s| s.laplacian * s.u_nu.abs().powf(p - 2.0) * s.u_nu);
    let volume = volume.value();
    let lhs = volume + third.value();
    let lhs_by_parts = volume + (p - 1.0) * (by_parts.value() + boundary);
    let rhs = -traces.integrate(|s| (nf - 1.0) * (s.u_nu / nf + s.h * s.u_nu.abs().powf(p)));
    let rhs_pnu = 0.5
        * traces.integrate(|s| {
            let delta_p = -1.0;
            2.0 * s.u_nu * (delta_p - (nf - 1.0) * s.h * s.u_nu.abs().powf(p - 2.0) * s.u_nu + 1.0 / nf)
        });
    let rhs_traces =
        0.5 * traces.integrate(|s| 2.0 * s.u_nu * ((p - 1.0) * s.u_nu.abs().powf(p - 2.0) * s.u_nunu + 1.0 / nf));
    let rel_gap = (lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1e-30);
    IdentitySides { lhs, rhs, rel_gap, lhs_by_parts, rhs_pnu, rhs_traces }
}

/// `-(p(N-1)/(p-1)) int (u_nu/N + H |u_nu|^p)`.
pub fn bound_ii(traces: &BoundaryTraces, p: f64) -> f64 {
    let nf = N as f64;
    -bound_prefactor(p) * traces.integrate(|s| s.u_nu / nf + s.h * s.u_nu.abs().powf(p))
}

/// `(p(N-1)/(p-1)) int |u_nu|^p (H_0 - H)`.
pub fn bound_iii(traces: &BoundaryTraces, h0: f64, p: f64) -> f64 {
    bound_prefactor(p) * traces.integrate(|s| s.u_nu.abs().powf(p) * (h0 - s.h))
}

/// `(p(N-1)/(p-1)) [ (d+rho_e)^N/(N rho_e^{N-1}) - rho_e/N ]^{p/(p-1)} ||H_0 - H||_{L^1}`.
pub fn stability_bound(p: f64, diam: f64, rho_e: f64, h_l1_dev: f64) -> f64 {
    bound_prefactor(p) * outer_annulus_factor(N, rho_e, diam).powf(p / (p - 1.0)) * h_l1_dev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrand_vanishes_on_radial_hessians() {
        // Radial profile: D = f'' n n^T + (f'/r)(I - n n^T) with (p-1) f'' = f'/r.
        for p in [1.25, 1.5, 2.0] {
            let r: f64 = 0.7;
            let fp = -(r / 2.0).powf(1.0 / (p - 1.0));
            let fpp = fp / r / (p - 1.0);
            for theta in [0.0, 0.4, 2.0] {
                let n = Vec2::new(f64::cos(theta), f64::sin(theta));
                let d = n * n.transpose() * fpp + (Matrix2::identity() - n * n.transpose()) * (fp / r);
                let g = n * fp;
                assert!(deficit_integrand(p, g, &d).abs() < 1e-12);
                assert!((p_laplacian(p, g, &d) + 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stability_prefactor_example() {
        // p = 1.5, diam 4, rho_e 0.5: 3 * 20^3.
        assert!((stability_bound(1.5, 4.0, 0.5, 1.0) - 24_000.0).abs() < 1e-8);
        assert_eq!(stability_bound(1.5, 4.0, 0.5, 0.0), 0.0);
    }
}
