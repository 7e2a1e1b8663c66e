//! The P-function `2(p-1)/p |grad u|^p + (2/N) u`.

use serde::Serialize;

use crate::geometry::{Mesh, Vec2};
use crate::solver::ScalarField;

pub const N: usize = 2;

pub fn p_function_field(p: f64, u: &ScalarField, vertex_gradients: &[Vec2]) -> ScalarField {
    ScalarField {
        values: u
            .values
            .iter()
            .zip(vertex_gradients)
            .map(|(v, g)| 2.0 * (p - 1.0) / p * g.norm().powf(p) + 2.0 / N as f64 * v)
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PFunctionSummary {
    pub max: f64,
    pub min: f64,
    pub argmax_on_boundary: bool,
    /// Largest interior value.
    pub interior_max: f64,
    /// Smallest discrete outward normal difference quotient over boundary edges.
    pub p_nu_min: f64,
    pub p_nu_max: f64,
}

/// Summarizes `pf`; the normal difference quotient at a boundary edge
/// compares the edge-midpoint value with the opposite vertex of the
/// adjacent triangle.
pub fn summarize(mesh: &Mesh, pf: &ScalarField, edge_triangles: &[usize]) -> PFunctionSummary {
    let arg = pf.argmax();
    let interior_max = (0..mesh.vertex_count())
        .filter(|&v| !mesh.is_boundary(v))
        .map(|v| pf.values[v])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut p_nu_min = f64::INFINITY;
    let mut p_nu_max = f64::NEG_INFINITY;
    for (e, &t) in mesh.boundary_edges.iter().zip(edge_triangles) {
        let opp = *mesh.triangles[t].iter().find(|&&v| v != e.a && v != e.b).unwrap();
        let mid = (mesh.vertices[e.a] + mesh.vertices[e.b]) / 2.0;
        let dist = e.normal.dot(&(mid - mesh.vertices[opp]));
        let q = (0.5 * (pf.values[e.a] + pf.values[e.b]) - pf.values[opp]) / dist;
        p_nu_min = p_nu_min.min(q);
        p_nu_max = p_nu_max.max(q);
    }
    PFunctionSummary {
        max: pf.max(),
        min: pf.values.iter().copied().fold(f64::INFINITY, f64::min),
        argmax_on_boundary: mesh.is_boundary(arg),
        interior_max,
        p_nu_min,
        p_nu_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_zero() {
        let u = ScalarField::zeros(4);
        let g = vec![Vec2::zeros(); 4];
        assert!(p_function_field(1.5, &u, &g).values.iter().all(|&v| v == 0.0));
    }
}
