//! Patchwise least-squares recovery of vertex derivatives from nodal values.
//!
//! At each vertex a full quadratic is fitted to the nodal values of a
//! vertex patch (its one-ring, or two rings at and next to the boundary and
//! where the one-ring cannot determine a quadratic). The Laplacian obtained from
//! the fit is then fitted by a linear polynomial over the same patch to get
//! its gradient.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::geometry::{Mesh, Vec2};
use crate::solver::ScalarField;

/// Ratio of smallest to largest singular value below which a patch is
/// treated as rank-deficient.
const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Recovered {
    pub gradient: Vec<Vec2>,
    /// Symmetric by construction.
    pub hessian: Vec<Matrix2<f64>>,
    pub laplacian: Vec<f64>,
    pub grad_laplacian: Vec<Vec2>,
    /// Rings used for each vertex patch.
    pub rings: Vec<u8>,
}

/// Vertex patches: the vertex itself plus `rings` rings of neighbours.
pub fn patch(neighbours: &[Vec<usize>], v: usize, rings: usize) -> Vec<usize> {
    let mut out = vec![v];
    let mut frontier = vec![v];
    for _ in 0..rings {
        let mut next = Vec::new();
        for &w in &frontier {
            for &x in &neighbours[w] {
                if !out.contains(&x) {
                    out.push(x);
                    next.push(x);
                }
            }
        }
        frontier = next;
    }
    out
}

fn fit(mesh: &Mesh, centre: Vec2, pts: &[usize], values: &[f64], quadratic: bool) -> Option<DVector<f64>> {
    let scale = pts.iter().map(|&w| (mesh.vertices[w] - centre).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let cols = if quadratic { 6 } else { 3 };
    if pts.len() < cols {
        return None;
    }
    let a = DMatrix::from_fn(pts.len(), cols, |i, j| {
        let d = (mesh.vertices[pts[i]] - centre) / scale;
        [1.0, d.x, d.y, d.x * d.x, d.x * d.y, d.y * d.y][j]
    });
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|&w| values[w]));
    let gram = a.tr_mul(&a).symmetric_eigenvalues();
    if !(gram.min() > RANK_TOL * RANK_TOL * gram.max()) {
        return None;
    }
    let qr = a.qr();
    let mut c = qr.r().solve_upper_triangular(&qr.q().tr_mul(&b))?;
    // Undo the coordinate scaling.
    c[1] /= scale;
    c[2] /= scale;
    if quadratic {
        c[3] /= scale * scale;
        c[4] /= scale * scale;
        c[5] /= scale * scale;
    }
    Some(c)
}

pub fn recover(mesh: &Mesh, u: &ScalarField) -> Result<Recovered> {
    let n = mesh.vertex_count();
    if u.values.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: u.values.len() });
    }
    let neighbours = mesh.neighbours();
    let mut gradient = Vec::with_capacity(n);
    let mut hessian = Vec::with_capacity(n);
    let mut laplacian = Vec::with_capacity(n);
    let mut patches = Vec::with_capacity(n);
    let mut rings = Vec::with_capacity(n);
    for v in 0..n {
        let near = mesh.is_boundary(v) || neighbours[v].iter().any(|&w| mesh.is_boundary(w));
        let first = if near { 2 } else { 1 };
        let mut found = None;
        for r in first..=2 {
            let pts = patch(&neighbours, v, r);
            if let Some(c) = fit(mesh, mesh.vertices[v], &pts, &u.values, true) {
                found = Some((c, pts, r));
                break;
            }
        }
        let (c, pts, r) = found.ok_or(Error::RankDeficientPatch { vertex: v })?;
        let h = Matrix2::new(2.0 * c[3], c[4], c[4], 2.0 * c[5]);
        gradient.push(Vec2::new(c[1], c[2]));
        laplacian.push(h.trace());
        hessian.push(h);
        patches.push(pts);
        rings.push(r as u8);
    }
    let mut grad_laplacian = Vec::with_capacity(n);
    for v in 0..n {
        let c = fit(mesh, mesh.vertices[v], &patches[v], &laplacian, false).ok_or(Error::RankDeficientPatch { vertex: v })?;
        grad_laplacian.push(Vec2::new(c[1], c[2]));
    }
    Ok(Recovered { gradient, hessian, laplacian, grad_laplacian, rings })
}

/// Area-weighted average of the adjacent triangle gradients at each vertex.
pub fn averaged_vertex_gradients(mesh: &Mesh, triangle_gradients: &[Vec2]) -> Vec<Vec2> {
    let mut acc = vec![Vec2::zeros(); mesh.vertex_count()];
    let mut weight = vec![0.0; mesh.vertex_count()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let a = mesh.triangle_area(t);
        for &v in tri {
            acc[v] += triangle_gradients[t] * a;
            weight[v] += a;
        }
    }
    acc.iter().zip(&weight).map(|(g, w)| if *w > 0.0 { g / *w } else { *g }).collect()
}
