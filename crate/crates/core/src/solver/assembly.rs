//! Discrete regularized energy `sum_T |T| (|g|^2 + eps^2)^{p/2} / p - (load, u)`
//! for piecewise-linear fields, with its gradient and Hessian.

use crate::error::{Error, Result};
use crate::geometry::{Mesh, Vec2};
use crate::quadrature::{sum, Summation};
use crate::solver::linear::SpdTriplets;
use crate::solver::ScalarField;

/// Relative eigenvalue floor of the per-triangle integrand Hessian.
const EIGEN_FLOOR: f64 = 1e-12;

/// Per-triangle data reused across assemblies.
#[derive(Clone, Debug)]
pub struct Discretization<'m> {
    pub mesh: &'m Mesh,
    pub area: Vec<f64>,
    /// Gradients of the three barycentric basis functions.
    pub basis: Vec<[Vec2; 3]>,
    /// Lumped load `|T|/3` summed over incident triangles.
    pub load: Vec<f64>,
    /// Unknown index of each interior vertex.
    pub dof: Vec<Option<usize>>,
    pub n_dof: usize,
    load_norm: f64,
}

impl<'m> Discretization<'m> {
    pub fn new(mesh: &'m Mesh) -> Self {
        let n = mesh.vertex_count();
        let mut area = Vec::with_capacity(mesh.triangles.len());
        let mut basis = Vec::with_capacity(mesh.triangles.len());
        let mut load = vec![0.0; n];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let a = mesh.triangle_area(t);
            let [p0, p1, p2] = tri.map(|v| mesh.vertices[v]);
            let grad = |b: Vec2, c: Vec2| Vec2::new(b.y - c.y, c.x - b.x) / (2.0 * a);
            basis.push([grad(p1, p2), grad(p2, p0), grad(p0, p1)]);
            area.push(a);
            for &v in tri {
                load[v] += a / 3.0;
            }
        }
        let mut dof = vec![None; n];
        let mut n_dof = 0;
        for v in 0..n {
            if !mesh.is_boundary(v) {
                dof[v] = Some(n_dof);
                n_dof += 1;
            }
        }
        let load_norm = sum((0..n).filter(|&v| dof[v].is_some()).map(|v| load[v] * load[v])).sqrt();
        Discretization { mesh, area, basis, load, dof, n_dof, load_norm }
    }

    /// Euclidean norm of the interior load vector.
    pub fn load_norm(&self) -> f64 {
        self.load_norm
    }

    fn check(&self, u: &ScalarField) -> Result<()> {
        if u.values.len() != self.mesh.vertex_count() {
            return Err(Error::SizeMismatch { expected: self.mesh.vertex_count(), got: u.values.len() });
        }
        Ok(())
    }

    pub fn triangle_gradient(&self, t: usize, u: &[f64]) -> Vec2 {
        let tri = self.mesh.triangles[t];
        let b = &self.basis[t];
        b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]]
    }

    pub fn energy(&self, p: f64, eps: f64, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        let mut total = Summation::default();
        for t in 0..self.area.len() {
            let g = self.triangle_gradient(t, &u.values);
            total.add(self.area[t] * (g.norm_squared() + eps * eps).powf(0.5 * p) / p);
        }
        for (v, &l) in self.load.iter().enumerate() {
            if self.dof[v].is_some() {
                total.add(-l * u.values[v]);
            }
        }
        Ok(total.value())
    }

    /// Gradient of the energy with respect to every nodal value; boundary
    /// entries are zero.
    pub fn energy_gradient(&self, p: f64, eps: f64, u: &ScalarField) -> Result<Vec<f64>> {
        self.check(u)?;
        let n = self.mesh.vertex_count();
        let mut acc = vec![Summation::default(); n];
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let g = self.triangle_gradient(t, &u.values);
            let q = g.norm_squared() + eps * eps;
            if q == 0.0 && p < 2.0 {
                return Err(Error::NonDifferentiable { triangle: t });
            }
            let flux = g * (self.area[t] * weight(p, q));
            for k in 0..3 {
                acc[tri[k]].add(self.basis[t][k].dot(&flux));
            }
        }
        Ok((0..n)
            .map(|v| if self.dof[v].is_some() { acc[v].value() - self.load[v] } else { 0.0 })
            .collect())
    }

    /// Energy gradient restricted to the unknowns.
    pub fn reduced_gradient(&self, full: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dof];
        for (v, d) in self.dof.iter().enumerate() {
            if let Some(i) = d {
                out[*i] = full[v];
            }
        }
        out
    }

    /// Positive-definite Hessian of the energy over the unknowns.
    pub fn hessian(&self, p: f64, eps: f64, u: &ScalarField) -> Result<SpdTriplets> {
        self.check(u)?;
        let mut k = SpdTriplets::with_capacity(self.n_dof, 6 * self.area.len());
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let g = self.triangle_gradient(t, &u.values);
            let q = g.norm_squared() + eps * eps;
            if q == 0.0 && p < 2.0 {
                return Err(Error::NonDifferentiable { triangle: t });
            }
            let h = integrand_hessian(p, q, g);
            for a in 0..3 {
                let Some(i) = self.dof[tri[a]] else { continue };
                let ha = h * self.basis[t][a];
                for b in 0..3 {
                    if let Some(j) = self.dof[tri[b]] {
                        k.add(i, j, self.area[t] * ha.dot(&self.basis[t][b]));
                    }
                }
            }
        }
        Ok(k)
    }

    pub fn gradient_field(&self, u: &ScalarField) -> Result<Vec<Vec2>> {
        self.check(u)?;
        Ok((0..self.area.len()).map(|t| self.triangle_gradient(t, &u.values)).collect())
    }

    /// Euclidean norm over interior basis functions `phi` of
    /// `int |grad u|^{p-2} grad u . grad phi - int phi`, divided by the load norm.
    pub fn residual(&self, p: f64, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        let n = self.mesh.vertex_count();
        let mut acc = vec![Summation::default(); n];
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            let g = self.triangle_gradient(t, &u.values);
            let q = g.norm_squared();
            let flux = if q > 0.0 { g * (self.area[t] * q.powf(0.5 * (p - 2.0))) } else { Vec2::zeros() };
            for k in 0..3 {
                acc[tri[k]].add(self.basis[t][k].dot(&flux));
            }
        }
        let r = sum((0..n).filter(|&v| self.dof[v].is_some()).map(|v| (acc[v].value() - self.load[v]).powi(2)));
        Ok(r.sqrt() / self.load_norm)
    }
}

/// `(|g|^2 + eps^2)^{(p-2)/2}` with `q = |g|^2 + eps^2`.
fn weight(p: f64, q: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else {
        q.powf(0.5 * (p - 2.0))
    }
}

/// Hessian of `g -> q^{p/2}/p`, with its eigenvalues floored.
fn integrand_hessian(p: f64, q: f64, g: Vec2) -> nalgebra::Matrix2<f64> {
    let s = weight(p, q);
    let gg = g.norm_squared();
    // Eigenvalues: s across g, s (1 + (p-2)|g|^2/q) along g.
    let floor = EIGEN_FLOOR * s;
    let across = s.max(floor);
    let along = (s * (1.0 + (p - 2.0) * gg / q)).max(floor);
    if gg == 0.0 {
        return nalgebra::Matrix2::identity() * across;
    }
    let n = g / gg.sqrt();
    nalgebra::Matrix2::identity() * across + n * n.transpose() * (along - across)
}
