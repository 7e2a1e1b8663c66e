//! Boundary traces of a solved field sampled at boundary-edge midpoints.

use nalgebra::Matrix2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, Mesh, Vec2};
use crate::quadrature::{gauss_legendre, sum};
use crate::solver::Recovered;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceSample {
    pub edge: usize,
    pub point: [f64; 2],
    pub u_nu: f64,
    pub u_nunu: f64,
    /// Recovered Laplacian at the sample.
    pub laplacian: f64,
    /// Exact signed curvature of the boundary at the sample.
    pub h: f64,
    /// Arclength of the curve piece the edge approximates.
    pub weight: f64,
    /// Normal derivative of the adjacent triangle's constant gradient.
    pub u_nu_triangle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryTraces {
    pub samples: Vec<TraceSample>,
}

/// Samples traces at each boundary edge midpoint. `u_nu` and `u_nunu` come
/// from the recovered vertex fits of the edge's endpoints, evaluated at the
/// midpoint and averaged.
pub fn boundary_traces(
    mesh: &Mesh,
    curve: &BoundaryCurve,
    recovered: &Recovered,
    triangle_gradients: &[Vec2],
    edge_triangles: &[usize],
) -> Result<BoundaryTraces> {
    let mut samples = Vec::with_capacity(mesh.boundary_edges.len());
    for (i, e) in mesh.boundary_edges.iter().enumerate() {
        let comp = curve.component(e.component);
        let mid = (mesh.vertices[e.a] + mesh.vertices[e.b]) / 2.0;
        let fit_gradient = |v: usize| recovered.gradient[v] + recovered.hessian[v] * (mid - mesh.vertices[v]);
        let g = (fit_gradient(e.a) + fit_gradient(e.b)) / 2.0;
        let hess: Matrix2<f64> = (recovered.hessian[e.a] + recovered.hessian[e.b]) / 2.0;
        let nu = e.normal;
        let u_nu = g.dot(&nu);
        let u_nu_triangle = triangle_gradients[edge_triangles[i]].dot(&nu);
        if !(u_nu < 0.0) || !(u_nu_triangle < 0.0) {
            return Err(Error::NonNegativeNormalDerivative { edge: i, u_nu: u_nu.max(u_nu_triangle) });
        }
        samples.push(TraceSample {
            edge: i,
            point: [mid.x, mid.y],
            u_nu,
            u_nunu: nu.dot(&(hess * nu)),
            laplacian: hess.trace(),
            h: curve.curvature(e.component, e.t_mid)?,
            weight: gauss_legendre(&|t| comp.speed(t), e.t_start, e.t_end),
            u_nu_triangle,
        });
    }
    Ok(BoundaryTraces { samples })
}

impl BoundaryTraces {
    /// Arclength-weighted sum of `f` over the samples.
    pub fn integrate(&self, f: impl Fn(&TraceSample) -> f64) -> f64 {
        sum(self.samples.iter().map(|s| s.weight * f(s)))
    }

    pub fn length(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    pub fn grad_range(&self) -> (f64, f64) {
        let it = self.samples.iter().map(|s| s.u_nu.abs());
        (it.clone().fold(f64::INFINITY, f64::min), it.fold(0.0, f64::max))
    }

    /// `| |u_nu|^{p-2} [(p-1) u_nunu + (N-1) H u_nu] + 1 |` per sample.
    pub fn equation_residuals(&self, p: f64, n: usize) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| (s.u_nu.abs().powf(p - 2.0) * ((p - 1.0) * s.u_nunu + (n as f64 - 1.0) * s.h * s.u_nu) + 1.0).abs())
            .collect()
    }
}
