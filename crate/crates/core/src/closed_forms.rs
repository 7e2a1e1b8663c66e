//! Exact radial solutions of the p-torsion problem on balls and annuli,
//! the gradient bounds they imply, and the inner/outer ball envelopes.
//!
//! These accept any dimension `n >= 2`; only the discrete solver is planar.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::quadrature::{bisect, integrate, Tolerance};

const F_TOL: Tolerance = Tolerance::new(1e-12, 1e-300);
const RBAR_MAX_ITER: usize = 60;

pub fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!("p must be in (1,2], got {p}")));
    }
    Ok(())
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {n}")));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// Torsion function of the ball `B_r(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialBallSolution {
    pub p: f64,
    pub n: usize,
    pub r: f64,
    pub z: [f64; 2],
}

impl RadialBallSolution {
    pub fn new(p: f64, n: usize, r: f64, z: [f64; 2]) -> Result<Self> {
        check_exponent(p)?;
        check_dimension(n)?;
        positive("radius", r)?;
        Ok(RadialBallSolution { p, n, r, z })
    }

    fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    fn scale(&self) -> f64 {
        (self.n as f64).powf(-1.0 / (self.p - 1.0))
    }

    /// Value at distance `rho` from the centre.
    pub fn profile(&self, rho: f64) -> f64 {
        let q = self.q();
        -(self.p - 1.0) / self.p * self.scale() * (rho.powf(q) - self.r.powf(q))
    }

    /// Radial derivative at distance `rho`.
    pub fn profile_derivative(&self, rho: f64) -> f64 {
        -self.scale() * rho.powf(1.0 / (self.p - 1.0))
    }

    pub fn profile_second_derivative(&self, rho: f64) -> f64 {
        -self.scale() / (self.p - 1.0) * rho.powf(1.0 / (self.p - 1.0) - 1.0)
    }

    pub fn value(&self, x: Vec2) -> f64 {
        self.profile(self.offset(x).norm())
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let d = self.offset(x);
        let rho = d.norm();
        if rho == 0.0 {
            return Vec2::zeros();
        }
        d * (self.profile_derivative(rho) / rho)
    }

    fn offset(&self, x: Vec2) -> Vec2 {
        x - Vec2::new(self.z[0], self.z[1])
    }

    pub fn center_value(&self) -> f64 {
        self.profile(0.0)
    }

    /// `|∇w|` on the sphere `|x - z| = r`, i.e. `(r/n)^{1/(p-1)}`.
    pub fn boundary_gradient(&self) -> f64 {
        (self.r / self.n as f64).powf(1.0 / (self.p - 1.0))
    }

    /// The constant value of the P-function `2(p-1)/p |∇w|^p + 2w/n`.
    pub fn p_function(&self) -> f64 {
        2.0 * (self.p - 1.0) / (self.p * (self.n as f64).powf(self.q())) * self.r.powf(self.q())
    }
}

/// Value and gradient of the ball torsion function at `x`.
pub fn radial_solution(p: f64, n: usize, r: f64, z: [f64; 2], x: Vec2) -> Result<(f64, Vec2)> {
    let w = RadialBallSolution::new(p, n, r, z)?;
    Ok((w.value(x), w.gradient(x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    F1,
    F2,
}

fn annulus_inputs(p: f64, n: usize, r1: f64, r2: f64) -> Result<()> {
    check_exponent(p)?;
    check_dimension(n)?;
    positive("R1", r1)?;
    if !(r2.is_finite() && r2 > r1) {
        return Err(Error::InvalidParameter(format!("annulus requires 0 < R1 < R2, got R1 = {r1}, R2 = {r2}")));
    }
    Ok(())
}

/// `ρ^n / (n τ^{n-1}) - τ/n`, positive for `τ < ρ`.
fn flux(n: usize, rho: f64, tau: f64) -> f64 {
    let nf = n as f64;
    rho.powi(n as i32) / (nf * tau.powi(n as i32 - 1)) - tau / nf
}

/// The two matching functions whose crossing fixes the free radius.
pub fn annulus_f(p: f64, n: usize, r1: f64, r2: f64, rho: f64, which: Which) -> Result<f64> {
    annulus_inputs(p, n, r1, r2)?;
    let e = 1.0 / (p - 1.0);
    match which {
        Which::F1 => {
            if !(r1..=r2).contains(&rho) {
                return Err(Error::InvalidParameter(format!("F1 needs rho in [{r1}, {r2}], got {rho}")));
            }
            integrate(|t| flux(n, rho, t).max(0.0).powf(e), r1, rho, F_TOL)
        }
        Which::F2 => {
            if !(0.0..=r2).contains(&rho) {
                return Err(Error::InvalidParameter(format!("F2 needs rho in [0, {r2}], got {rho}")));
            }
            integrate(|t| (-flux(n, rho, t)).max(0.0).powf(e), rho, r2, F_TOL)
        }
    }
}

/// Radius where the annulus torsion function peaks.
pub fn find_rbar(p: f64, n: usize, r1: f64, r2: f64) -> Result<f64> {
    annulus_inputs(p, n, r1, r2)?;
    let g = |rho: f64| Ok(annulus_f(p, n, r1, r2, rho, Which::F1)? - annulus_f(p, n, r1, r2, rho, Which::F2)?);
    bisect(g, r1, r2, RBAR_MAX_ITER)
}

/// Torsion function of the annulus `R1 < |x| < R2` centred at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnnulusSolution {
    pub p: f64,
    pub n: usize,
    pub r1: f64,
    pub r2: f64,
    pub rbar: f64,
}

impl AnnulusSolution {
    pub fn new(p: f64, n: usize, r1: f64, r2: f64) -> Result<Self> {
        let rbar = find_rbar(p, n, r1, r2)?;
        Ok(AnnulusSolution { p, n, r1, r2, rbar })
    }

    pub fn profile(&self, r: f64) -> Result<f64> {
        if !(self.r1..=self.r2).contains(&r) {
            return Err(Error::InvalidParameter(format!("r = {r} outside [{}, {}]", self.r1, self.r2)));
        }
        let e = 1.0 / (self.p - 1.0);
        let (n, rb) = (self.n, self.rbar);
        if r <= rb {
            integrate(|t| flux(n, rb, t).max(0.0).powf(e), self.r1, r, F_TOL)
        } else {
            integrate(|t| (-flux(n, rb, t)).max(0.0).powf(e), r, self.r2, F_TOL)
        }
    }

    pub fn profile_derivative(&self, r: f64) -> f64 {
        let g = flux(self.n, self.rbar, r);
        g.signum() * g.abs().powf(1.0 / (self.p - 1.0))
    }

    pub fn profile_second_derivative(&self, r: f64) -> f64 {
        let nf = self.n as f64;
        let g = flux(self.n, self.rbar, r);
        let dg = -(nf - 1.0) * self.rbar.powi(self.n as i32) / (nf * r.powi(self.n as i32)) - 1.0 / nf;
        dg * g.abs().powf(1.0 / (self.p - 1.0) - 1.0) / (self.p - 1.0)
    }

    pub fn value(&self, x: Vec2) -> Result<f64> {
        self.profile(x.norm())
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let r = x.norm();
        x * (self.profile_derivative(r) / r)
    }
}

pub fn annulus_solution(p: f64, n: usize, r1: f64, r2: f64) -> Result<AnnulusSolution> {
    AnnulusSolution::new(p, n, r1, r2)
}

/// Two-sided bound on `|∇u|` over the boundary of a domain with touching
/// radii `rho_i`, `rho_e` and diameter `diam`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientBounds {
    pub lower: f64,
    pub upper: f64,
}

/// The bracketed geometric factor `(d+ρe)^n/(n ρe^{n-1}) - ρe/n` of the upper bound.
pub fn outer_annulus_factor(n: usize, rho_e: f64, diam: f64) -> f64 {
    let nf = n as f64;
    (diam + rho_e).powi(n as i32) / (nf * rho_e.powi(n as i32 - 1)) - rho_e / nf
}

pub fn gradient_bounds(p: f64, n: usize, rho_i: f64, rho_e: f64, diam: f64) -> Result<GradientBounds> {
    check_exponent(p)?;
    check_dimension(n)?;
    positive("rho_i", rho_i)?;
    positive("rho_e", rho_e)?;
    positive("diameter", diam)?;
    let e = 1.0 / (p - 1.0);
    Ok(GradientBounds {
        lower: (rho_i / n as f64).powf(e),
        upper: outer_annulus_factor(n, rho_e, diam).powf(e),
    })
}

/// Inner and outer ball envelopes `(u_i(x), u_e(x))` centred at the origin.
pub fn comparison_envelopes(p: f64, n: usize, r_i: f64, r_e: f64, x: Vec2) -> Result<(f64, f64)> {
    if !(r_i <= r_e) {
        return Err(Error::InvalidParameter(format!("need r_i <= r_e, got {r_i} > {r_e}")));
    }
    let inner = RadialBallSolution::new(p, n, r_i, [0.0, 0.0])?;
    let outer = RadialBallSolution::new(p, n, r_e, [0.0, 0.0])?;
    Ok((inner.value(x), outer.value(x)))
}
