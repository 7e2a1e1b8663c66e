//! Areas, lengths, curvature integrals and touching radii of a boundary.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::curve::{BoundaryCurve, Vec2};
use crate::geometry::domain::{DomainConfig, DomainSpec};
use crate::quadrature::{integrate, sum, Tolerance};

/// Relative accuracy of every boundary quadrature.
pub const BOUNDARY_QUAD_TOL: f64 = 1e-10;
/// Points per component used for the pairwise diameter search.
const DIAMETER_SAMPLES: usize = 4096;
/// Points per component used to validate touching balls.
const TOUCHING_SAMPLES: usize = 2048;

fn quad() -> Tolerance {
    Tolerance::new(BOUNDARY_QUAD_TOL, 1e-14)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measures {
    pub area: f64,
    pub perimeter: f64,
    pub diameter: f64,
}

/// Integral of `f(component, t) * |r'(t)|` over every boundary component.
pub fn boundary_integral<F>(curve: &BoundaryCurve, f: F) -> Result<f64>
where
    F: Fn(usize, f64) -> f64,
{
    let parts = (0..curve.component_count())
        .map(|c| {
            let comp = curve.component(c);
            integrate(|t| f(c, t) * comp.speed(t), 0.0, TAU, quad())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sum(parts))
}

pub fn area(curve: &BoundaryCurve) -> Result<f64> {
    // Green: |Ω| = ½ ∮ (x dy − y dx); the orientation convention makes the
    // hole of an annulus contribute negatively.
    let parts = curve
        .components()
        .iter()
        .map(|comp| {
            integrate(
                |t| {
                    let p = comp.point(t);
                    let d = comp.d1(t);
                    0.5 * (p.x * d.y - p.y * d.x)
                },
                0.0,
                TAU,
                quad(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sum(parts))
}

pub fn perimeter(curve: &BoundaryCurve) -> Result<f64> {
    boundary_integral(curve, |_, _| 1.0)
}

/// Diameter of the domain, equal to the diameter of its boundary.
pub fn diameter(curve: &BoundaryCurve) -> f64 {
    let pts: Vec<(usize, f64, Vec2)> = curve
        .samples(DIAMETER_SAMPLES)
        .map(|(c, t)| (c, t, curve.component(c).point(t)))
        .collect();
    let mut best = (0usize, 0usize, -1.0f64);
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = (pts[i].2 - pts[j].2).norm_squared();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (ci, mut ti) = (pts[best.0].0, pts[best.0].1);
    let (cj, mut tj) = (pts[best.1].0, pts[best.1].1);
    let (a, b) = (curve.component(ci), curve.component(cj));
    let mut step = TAU / DIAMETER_SAMPLES as f64;
    let mut d_best = (a.point(ti) - b.point(tj)).norm();
    // Refine the pair on grids four times finer around the current best.
    while step > 1e-13 {
        step /= 4.0;
        let (mut bi, mut bj) = (ti, tj);
        for di in -4..=4 {
            for dj in -4..=4 {
                let (si, sj) = (ti + di as f64 * step, tj + dj as f64 * step);
                let d = (a.point(si) - b.point(sj)).norm();
                if d > d_best {
                    d_best = d;
                    bi = si;
                    bj = sj;
                }
            }
        }
        ti = bi;
        tj = bj;
    }
    d_best
}

pub fn measures(curve: &BoundaryCurve) -> Result<Measures> {
    Ok(Measures { area: area(curve)?, perimeter: perimeter(curve)?, diameter: diameter(curve) })
}

/// Reference mean curvature `H_0 = |∂Ω| / (N |Ω|)` with `N = 2`, and the
/// radius `R_0 = 1 / H_0` of the reference ball.
pub fn reference_constants(m: &Measures) -> Result<(f64, f64)> {
    if !(m.area > 0.0 && m.perimeter > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "area and perimeter must be positive (area = {}, perimeter = {})",
            m.area, m.perimeter
        )));
    }
    let h0 = m.perimeter / (2.0 * m.area);
    Ok((h0, 1.0 / h0))
}

/// `∫ κ ds` over every component.
pub fn total_curvature(curve: &BoundaryCurve) -> Result<f64> {
    boundary_integral(curve, |c, t| curve.curvature(c, t).unwrap_or(f64::NAN))
}

/// Per-component `∫ κ ds`; equals `2π` on a simple closed outer curve.
pub fn component_total_curvature(curve: &BoundaryCurve, c: usize) -> Result<f64> {
    let comp = curve.component(c);
    integrate(|t| curve.curvature(c, t).unwrap_or(f64::NAN) * comp.speed(t), 0.0, TAU, quad())
}

/// Minkowski integral `∫ H ⟨x − z, ν⟩ dσ`.
pub fn minkowski_integral(curve: &BoundaryCurve, z: Vec2) -> Result<f64> {
    boundary_integral(curve, |c, t| {
        let comp = curve.component(c);
        let k = curve.curvature(c, t).unwrap_or(f64::NAN);
        k * (comp.point(t) - z).dot(&comp.outward_normal(t))
    })
}

/// `‖H − H_0‖_{L¹(∂Ω)}`.
pub fn curvature_l1_deviation(curve: &BoundaryCurve, h0: f64) -> Result<f64> {
    boundary_integral(curve, |c, t| (curve.curvature(c, t).unwrap_or(f64::NAN) - h0).abs())
}

/// Mean and standard deviation of `H` with respect to arclength.
pub fn curvature_moments(curve: &BoundaryCurve, perimeter: f64) -> Result<(f64, f64)> {
    let mean = total_curvature(curve)? / perimeter;
    let var = boundary_integral(curve, |c, t| (curve.curvature(c, t).unwrap_or(f64::NAN) - mean).powi(2))? / perimeter;
    Ok((mean, var.max(0.0).sqrt()))
}

/// Signed curvature range over dense samples.
pub fn curvature_range(curve: &BoundaryCurve) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (c, t) in curve.samples(TOUCHING_SAMPLES) {
        let k = curve.curvature(c, t)?;
        lo = lo.min(k);
        hi = hi.max(k);
    }
    Ok((lo, hi))
}

/// Interior and exterior touching radii `(ρ_i, ρ_e)`.
///
/// Starts from `1/κ_max` (the annulus uses its exact radii) and halves a
/// candidate until every sampled touching ball is free of boundary samples.
pub fn touching_radii(curve: &BoundaryCurve) -> Result<(f64, f64)> {
    if let DomainSpec::Annulus { r1, r2 } = curve.spec() {
        return Ok(((r2 - r1) / 2.0, *r1));
    }
    let (k_min, k_max) = curve_range_or_err(curve)?;
    let diam = diameter(curve);
    let floor = 1e-6 * diam;
    let start_i = 1.0 / k_max.max(f64::MIN_POSITIVE);
    let start_e = if k_min < 0.0 { 1.0 / (-k_min).max(k_max) } else { start_i };
    let rho_i = validate_radius(curve, start_i, -1.0, floor)?;
    let rho_e = validate_radius(curve, start_e, 1.0, floor)?;
    Ok((rho_i, rho_e))
}

fn curve_range_or_err(curve: &BoundaryCurve) -> Result<(f64, f64)> {
    let (lo, hi) = curvature_range(curve)?;
    if !(hi > 0.0) {
        return Err(Error::DegenerateGeometry("boundary has no positively curved point".into()));
    }
    Ok((lo, hi))
}

/// `side = -1` checks interior balls (centre `x0 − ρν`), `+1` exterior balls.
fn validate_radius(curve: &BoundaryCurve, start: f64, side: f64, floor: f64) -> Result<f64> {
    let pts: Vec<(Vec2, Vec2)> = curve
        .samples(TOUCHING_SAMPLES)
        .map(|(c, t)| {
            let comp = curve.component(c);
            (comp.point(t), comp.outward_normal(t))
        })
        .collect();
    let mut rho = start;
    while rho >= floor {
        let ok = pts.iter().all(|(x0, nu)| {
            let centre = x0 + nu * (side * rho);
            pts.iter().all(|(x, _)| (x - centre).norm() >= rho * (1.0 - 1e-9))
        });
        if ok {
            return Ok(rho);
        }
        rho *= 0.5;
    }
    Err(Error::DegenerateGeometry(format!("no touching ball of radius above {floor:e} passes validation")))
}

/// Everything the diagnostics need to know about the domain's shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricSummary {
    pub area: f64,
    pub perimeter: f64,
    pub diameter: f64,
    pub h0: f64,
    pub r0: f64,
    pub rho_i: f64,
    pub rho_e: f64,
    pub rho: f64,
    pub curvature_min: f64,
    pub curvature_max: f64,
    /// True when `rho_i` or `rho_e` came from the config rather than sampling.
    pub rho_overridden: bool,
}

impl GeometricSummary {
    pub fn compute(config: &DomainConfig, curve: &BoundaryCurve) -> Result<Self> {
        let m = measures(curve)?;
        let (h0, r0) = reference_constants(&m)?;
        let (k_min, k_max) = curvature_range(curve)?;
        let (rho_i, rho_e) = match (config.rho_i, config.rho_e) {
            (Some(i), Some(e)) => (i, e),
            (oi, oe) => {
                let (i, e) = touching_radii(curve)?;
                (oi.unwrap_or(i), oe.unwrap_or(e))
            }
        };
        if !(rho_i > 0.0 && rho_e > 0.0) {
            return Err(Error::InvalidParameter(format!("touching radii must be positive, got ({rho_i}, {rho_e})")));
        }
        Ok(GeometricSummary {
            area: m.area,
            perimeter: m.perimeter,
            diameter: m.diameter,
            h0,
            r0,
            rho_i,
            rho_e,
            rho: rho_i.min(rho_e),
            curvature_min: k_min,
            curvature_max: k_max,
            rho_overridden: config.rho_i.is_some() || config.rho_e.is_some(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn curve(spec: &DomainSpec) -> BoundaryCurve {
        BoundaryCurve::new(spec).unwrap()
    }

    /// Ellipse perimeter by the arithmetic–geometric mean:
    /// `P = 2π · AGM(a, b)^{-1} · (a² − Σ 2^{n−1} c_n²)`, independent of
    /// the quadrature being tested.
    fn ellipse_perimeter_agm(a: f64, b: f64) -> f64 {
        let (mut x, mut y) = (a, b);
        let mut s = 0.5 * (a * a - b * b);
        let mut pow = 0.5;
        for _ in 0..30 {
            let xn = 0.5 * (x + y);
            let yn = (x * y).sqrt();
            let c = 0.5 * (x - y);
            pow *= 2.0;
            s += pow * c * c;
            x = xn;
            y = yn;
        }
        2.0 * PI / x * (a * a - s)
    }

    #[test]
    fn agm_oracle_is_sane() {
        assert!((ellipse_perimeter_agm(1.0, 1.0) - TAU).abs() < 1e-14);
        assert!((ellipse_perimeter_agm(2.0, 1.0) - 9.688448220547675).abs() < 1e-12);
    }

    #[test]
    fn measures_examples() {
        let m = measures(&curve(&DomainSpec::Disk { r: 1.0 })).unwrap();
        assert!((m.area - PI).abs() < 1e-12);
        assert!((m.perimeter - TAU).abs() < 1e-12);
        assert!((m.diameter - 2.0).abs() < 1e-12);

        let m = measures(&curve(&DomainSpec::Annulus { r1: 1.0, r2: 2.0 })).unwrap();
        assert!((m.area - 3.0 * PI).abs() < 1e-12);
        assert!((m.perimeter - 6.0 * PI).abs() < 1e-12);
        assert!((m.diameter - 4.0).abs() < 1e-12);

        let m = measures(&curve(&DomainSpec::Ellipse { a: 2.0, b: 1.0 })).unwrap();
        assert!((m.area - TAU).abs() < 1e-12);
        let p = ellipse_perimeter_agm(2.0, 1.0);
        assert!((m.perimeter - p).abs() / p < 1e-10);
        assert!((m.perimeter - 9.688448).abs() < 1e-6);
        assert!((m.diameter - 4.0).abs() < 1e-12);
    }

    #[test]
    fn reference_constants_examples() {
        let m = measures(&curve(&DomainSpec::Disk { r: 3.0 })).unwrap();
        let (h0, r0) = reference_constants(&m).unwrap();
        assert!((h0 - 1.0 / 3.0).abs() < 1e-12 && (r0 - 3.0).abs() < 1e-11);

        let m = measures(&curve(&DomainSpec::Ellipse { a: 2.0, b: 1.0 })).unwrap();
        let (h0, _) = reference_constants(&m).unwrap();
        assert!((h0 - 9.688448220547675 / (2.0 * TAU)).abs() < 1e-10);
        assert!((h0 - 0.77098).abs() < 1e-5);

        let m = measures(&curve(&DomainSpec::Annulus { r1: 1.0, r2: 2.0 })).unwrap();
        let (h0, _) = reference_constants(&m).unwrap();
        assert!((h0 - 1.0).abs() < 1e-12);

        let zero = Measures { area: 0.0, perimeter: 1.0, diameter: 1.0 };
        assert!(reference_constants(&zero).is_err());
    }

    #[test]
    fn touching_radii_examples() {
        let d = DomainSpec::Disk { r: 1.0 };
        let (i, e) = touching_radii(&curve(&d)).unwrap();
        assert!((i - 1.0).abs() < 1e-12 && (e - 1.0).abs() < 1e-12);

        let el = DomainSpec::Ellipse { a: 2.0, b: 1.0 };
        let (i, e) = touching_radii(&curve(&el)).unwrap();
        assert!((i - 0.5).abs() < 1e-12 && (e - 0.5).abs() < 1e-12);

        let an = DomainSpec::Annulus { r1: 1.0, r2: 2.0 };
        let (i, e) = touching_radii(&curve(&an)).unwrap();
        assert_eq!((i, e), (0.5, 1.0));
    }

    #[test]
    fn touching_radius_halves_for_a_wavy_domain() {
        // A 5-fold star with strongly concave lobes.
        let f = DomainSpec::Fourier { c0: 1.0, cos: vec![0.0, 0.0, 0.0, 0.0, 0.12], sin: vec![] };
        let c = curve(&f);
        let (k_min, k_max) = curvature_range(&c).unwrap();
        assert!(k_min < 0.0);
        let (i, e) = touching_radii(&c).unwrap();
        assert!(i <= 1.0 / k_max + 1e-12);
        assert!(e <= 1.0 / (-k_min) + 1e-12);
        assert!(i > 0.0 && e > 0.0);
    }

    #[test]
    fn overrides_are_recorded() {
        let cfg = DomainConfig { spec: DomainSpec::Disk { r: 1.0 }, rho_i: Some(0.8), rho_e: None };
        let s = GeometricSummary::compute(&cfg, &curve(&cfg.spec)).unwrap();
        assert_eq!(s.rho_i, 0.8);
        assert!((s.rho_e - 1.0).abs() < 1e-12);
        assert!(s.rho_overridden);
        assert_eq!(s.rho, 0.8);
    }

    #[test]
    fn gauss_bonnet_and_minkowski() {
        let specs = [
            DomainSpec::Disk { r: 1.3 },
            DomainSpec::Ellipse { a: 2.0, b: 1.0 },
            DomainSpec::Fourier { c0: 1.0, cos: vec![0.0, 0.1], sin: vec![0.0, 0.05] },
        ];
        for spec in &specs {
            let c = curve(spec);
            let tk = component_total_curvature(&c, 0).unwrap();
            assert!((tk - TAU).abs() / TAU < 1e-8, "{spec:?}: {tk}");
            let p = perimeter(&c).unwrap();
            for z in [Vec2::new(0.0, 0.0), Vec2::new(0.3, -0.2)] {
                let mk = minkowski_integral(&c, z).unwrap();
                assert!((mk - p).abs() / p < 1e-8, "{spec:?}: {mk} vs {p}");
            }
        }
        // Annulus: inner circle carries total curvature −2π.
        let a = curve(&DomainSpec::Annulus { r1: 1.0, r2: 2.0 });
        assert!((component_total_curvature(&a, 1).unwrap() + TAU).abs() < 1e-10);
        assert!(total_curvature(&a).unwrap().abs() < 1e-10);
    }

    #[test]
    fn constant_curvature_equals_h0() {
        let c = curve(&DomainSpec::Disk { r: 0.7 });
        let m = measures(&c).unwrap();
        let (h0, _) = reference_constants(&m).unwrap();
        assert!((c.curvature(0, 1.234).unwrap() - h0).abs() < 1e-8);
        assert!(curvature_l1_deviation(&c, h0).unwrap() < 1e-8);
    }
}
