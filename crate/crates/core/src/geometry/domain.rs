use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::curve::BoundaryCurve;

/// Shape of a smooth planar domain.
///
/// All lengths are dimensionless. The JSON form is internally tagged by
/// `"kind"`, e.g. `{"kind":"ellipse","a":2.0,"b":1.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    Disk { r: f64 },
    Ellipse { a: f64, b: f64 },
    Annulus { r1: f64, r2: f64 },
    /// Star-shaped domain with radius function
    /// `c0 + sum_k (cos[k-1] cos(k t) + sin[k-1] sin(k t))`.
    Fourier {
        c0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

/// A domain plus optional touching-radius overrides, as read from config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    #[serde(flatten)]
    pub spec: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_i: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_e: Option<f64>,
}

impl From<DomainSpec> for DomainConfig {
    fn from(spec: DomainSpec) -> Self {
        DomainConfig { spec, rho_i: None, rho_e: None }
    }
}

/// Samples used to check positivity of the Fourier radius function and
/// simplicity of the resulting curve.
const VALIDATION_SAMPLES: usize = 1024;

impl DomainSpec {
    /// Ellipse with semi-axes chosen so that the area equals `area` and the
    /// eccentricity equals `e`.
    pub fn ellipse_with_area(area: f64, e: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&e) {
            return Err(Error::InvalidParameter(format!("eccentricity must lie in [0,1), got {e}")));
        }
        let ratio = (1.0 - e * e).sqrt();
        let a = (area / (std::f64::consts::PI * ratio)).sqrt();
        Ok(DomainSpec::Ellipse { a, b: a * ratio })
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            DomainSpec::Disk { r } => {
                if !(r.is_finite() && *r > 0.0) {
                    return Err(Error::InvalidDomain(format!("disk radius must be positive, got {r}")));
                }
            }
            DomainSpec::Ellipse { a, b } => {
                if !(finite(&[*a, *b]) && *b > 0.0 && a >= b) {
                    return Err(Error::InvalidDomain(format!("ellipse requires a >= b > 0, got a = {a}, b = {b}")));
                }
            }
            DomainSpec::Annulus { r1, r2 } => {
                if !(finite(&[*r1, *r2]) && *r1 > 0.0 && r1 < r2) {
                    return Err(Error::InvalidDomain(format!("annulus requires 0 < r1 < r2, got r1 = {r1}, r2 = {r2}")));
                }
            }
            DomainSpec::Fourier { c0, cos, sin } => {
                if !finite(std::slice::from_ref(c0)) || !finite(cos) || !finite(sin) {
                    return Err(Error::InvalidDomain("non-finite Fourier coefficient".into()));
                }
                let rho = |t: f64| fourier_radius(*c0, cos, sin, t);
                for i in 0..VALIDATION_SAMPLES {
                    let t = std::f64::consts::TAU * i as f64 / VALIDATION_SAMPLES as f64;
                    let r = rho(t);
                    if r <= 0.0 {
                        return Err(Error::InvalidDomain(format!("radius function is non-positive ({r:.3e}) at t = {t:.6}")));
                    }
                }
                let poly: Vec<[f64; 2]> = (0..VALIDATION_SAMPLES)
                    .map(|i| {
                        let t = std::f64::consts::TAU * i as f64 / VALIDATION_SAMPLES as f64;
                        let r = rho(t);
                        [r * t.cos(), r * t.sin()]
                    })
                    .collect();
                if let Some((i, j)) = first_self_intersection(&poly) {
                    return Err(Error::InvalidDomain(format!("boundary self-intersects between samples {i} and {j}")));
                }
            }
        }
        Ok(())
    }

    /// Analytic point-in-domain test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            DomainSpec::Disk { r } => x * x + y * y < r * r,
            DomainSpec::Ellipse { a, b } => (x / a).powi(2) + (y / b).powi(2) < 1.0,
            DomainSpec::Annulus { r1, r2 } => {
                let rr = x * x + y * y;
                rr > r1 * r1 && rr < r2 * r2
            }
            DomainSpec::Fourier { c0, cos, sin } => {
                let t = y.atan2(x);
                (x * x + y * y).sqrt() < fourier_radius(*c0, cos, sin, t)
            }
        }
    }

    pub fn boundary(&self) -> Result<BoundaryCurve> {
        BoundaryCurve::new(self)
    }

    pub fn component_count(&self) -> usize {
        match self {
            DomainSpec::Annulus { .. } => 2,
            _ => 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            DomainSpec::Disk { r } => format!("disk(r={r})"),
            DomainSpec::Ellipse { a, b } => format!("ellipse(a={a},b={b})"),
            DomainSpec::Annulus { r1, r2 } => format!("annulus(r1={r1},r2={r2})"),
            DomainSpec::Fourier { c0, cos, sin } => format!("fourier(c0={c0},cos={cos:?},sin={sin:?})"),
        }
    }
}

pub(crate) fn fourier_radius(c0: f64, cos: &[f64], sin: &[f64], t: f64) -> f64 {
    let mut r = c0;
    for (k, c) in cos.iter().enumerate() {
        r += c * ((k + 1) as f64 * t).cos();
    }
    for (k, s) in sin.iter().enumerate() {
        r += s * ((k + 1) as f64 * t).sin();
    }
    r
}

/// Returns the first pair of non-adjacent segments of the closed polygon
/// that intersect.
fn first_self_intersection(poly: &[[f64; 2]]) -> Option<(usize, usize)> {
    let n = poly.len();
    let seg = |i: usize| (poly[i], poly[(i + 1) % n]);
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_cross(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_forms_round_trip() {
        let cases = [
            r#"{"kind":"disk","r":1.0}"#,
            r#"{"kind":"ellipse","a":2.0,"b":1.0}"#,
            r#"{"kind":"annulus","r1":1.0,"r2":2.0}"#,
            r#"{"kind":"fourier","c0":1.0,"cos":[0.0,0.1],"sin":[0.05]}"#,
        ];
        for c in cases {
            let d: DomainConfig = serde_json::from_str(c).unwrap();
            assert_eq!(serde_json::to_string(&d).unwrap(), c);
        }
        let d: DomainConfig = serde_json::from_str(r#"{"kind":"ellipse","a":2.0,"b":1.0,"rho_e":0.25}"#).unwrap();
        assert_eq!(d.rho_e, Some(0.25));
        assert!(serde_json::from_str::<DomainConfig>(r#"{"kind":"square","s":1.0}"#).is_err());
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(DomainSpec::Disk { r: 0.0 }.validate().is_err());
        assert!(DomainSpec::Ellipse { a: 1.0, b: 2.0 }.validate().is_err());
        assert!(DomainSpec::Annulus { r1: 2.0, r2: 1.0 }.validate().is_err());
        let bad = DomainSpec::Fourier { c0: 1.0, cos: vec![0.0, 1.2], sin: vec![] };
        assert!(matches!(bad.validate(), Err(Error::InvalidDomain(_))));
        let ok = DomainSpec::Fourier { c0: 1.0, cos: vec![0.0, 0.1], sin: vec![0.0, 0.05] };
        ok.validate().unwrap();
    }

    #[test]
    fn self_intersection_detector_sees_a_bowtie() {
        let bowtie = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(first_self_intersection(&bowtie).is_some());
        let square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(first_self_intersection(&square).is_none());
    }

    #[test]
    fn ellipse_family_keeps_area() {
        for e in [0.0, 0.2, 0.4, 0.6] {
            if let DomainSpec::Ellipse { a, b } = DomainSpec::ellipse_with_area(std::f64::consts::TAU, e).unwrap() {
                assert!((a * b - 2.0).abs() < 1e-14);
                assert!(((1.0 - (b / a).powi(2)).sqrt() - e).abs() < 1e-12);
            } else {
                unreachable!();
            }
        }
    }
}
