//! Parametric boundary curves.
//!
//! Every component is parametrized over `[0, 2π)` with the domain on the
//! left of the direction of travel. Outer boundaries therefore run
//! counter-clockwise and the inner circle of an annulus runs clockwise, so
//! the right-hand normal `(y', -x') / |r'|` is the outward normal of the
//! domain on every component and the signed curvature
//! `(x'y'' - y'x'') / |r'|^3` is positive where the domain is locally
//! convex.

use std::f64::consts::TAU;

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::geometry::domain::{fourier_radius, DomainSpec};

pub type Vec2 = Vector2<f64>;

#[derive(Clone, Debug, PartialEq)]
pub enum Component {
    Circle { radius: f64, clockwise: bool },
    Ellipse { a: f64, b: f64 },
    Polar { c0: f64, cos: Vec<f64>, sin: Vec<f64> },
}

impl Component {
    pub fn point(&self, t: f64) -> Vec2 {
        match self {
            Component::Circle { radius, clockwise } => {
                let s = if *clockwise { -1.0 } else { 1.0 };
                Vec2::new(radius * t.cos(), s * radius * t.sin())
            }
            Component::Ellipse { a, b } => Vec2::new(a * t.cos(), b * t.sin()),
            Component::Polar { c0, cos, sin } => {
                let r = fourier_radius(*c0, cos, sin, t);
                Vec2::new(r * t.cos(), r * t.sin())
            }
        }
    }

    pub fn d1(&self, t: f64) -> Vec2 {
        match self {
            Component::Circle { radius, clockwise } => {
                let s = if *clockwise { -1.0 } else { 1.0 };
                Vec2::new(-radius * t.sin(), s * radius * t.cos())
            }
            Component::Ellipse { a, b } => Vec2::new(-a * t.sin(), b * t.cos()),
            Component::Polar { .. } => {
                let (r, dr, _) = self.polar_radius(t);
                let (s, c) = t.sin_cos();
                Vec2::new(dr * c - r * s, dr * s + r * c)
            }
        }
    }

    pub fn d2(&self, t: f64) -> Vec2 {
        match self {
            Component::Circle { radius, clockwise } => {
                let s = if *clockwise { -1.0 } else { 1.0 };
                Vec2::new(-radius * t.cos(), -s * radius * t.sin())
            }
            Component::Ellipse { a, b } => Vec2::new(-a * t.cos(), -b * t.sin()),
            Component::Polar { .. } => {
                let (r, dr, ddr) = self.polar_radius(t);
                let (s, c) = t.sin_cos();
                Vec2::new(ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s)
            }
        }
    }

    /// Radius function and its first two derivatives (polar components only).
    fn polar_radius(&self, t: f64) -> (f64, f64, f64) {
        match self {
            Component::Polar { c0, cos, sin } => {
                let (mut r, mut dr, mut ddr) = (*c0, 0.0, 0.0);
                for (k, c) in cos.iter().enumerate() {
                    let k = (k + 1) as f64;
                    let (sk, ck) = (k * t).sin_cos();
                    r += c * ck;
                    dr -= c * k * sk;
                    ddr -= c * k * k * ck;
                }
                for (k, s) in sin.iter().enumerate() {
                    let k = (k + 1) as f64;
                    let (sk, ck) = (k * t).sin_cos();
                    r += s * sk;
                    dr += s * k * ck;
                    ddr -= s * k * k * sk;
                }
                (r, dr, ddr)
            }
            _ => unreachable!("polar_radius on a non-polar component"),
        }
    }

    /// Parametric speed `|r'(t)|`.
    pub fn speed(&self, t: f64) -> f64 {
        self.d1(t).norm()
    }

    pub fn outward_normal(&self, t: f64) -> Vec2 {
        let d = self.d1(t);
        Vec2::new(d.y, -d.x) / d.norm()
    }

    fn signed_curvature(&self, t: f64) -> Option<f64> {
        let d = self.d1(t);
        let dd = self.d2(t);
        let speed = d.norm();
        if !(speed > 1e-14) {
            return None;
        }
        Some((d.x * dd.y - d.y * dd.x) / speed.powi(3))
    }
}

/// The boundary of a domain as a list of closed parametric components.
#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    spec: DomainSpec,
    components: Vec<Component>,
}

impl BoundaryCurve {
    pub fn new(spec: &DomainSpec) -> Result<Self> {
        spec.validate()?;
        let components = match spec {
            DomainSpec::Disk { r } => vec![Component::Circle { radius: *r, clockwise: false }],
            DomainSpec::Ellipse { a, b } => vec![Component::Ellipse { a: *a, b: *b }],
            DomainSpec::Annulus { r1, r2 } => vec![
                Component::Circle { radius: *r2, clockwise: false },
                Component::Circle { radius: *r1, clockwise: true },
            ],
            DomainSpec::Fourier { c0, cos, sin } => {
                vec![Component::Polar { c0: *c0, cos: cos.clone(), sin: sin.clone() }]
            }
        };
        let curve = BoundaryCurve { spec: spec.clone(), components };
        for (c, comp) in curve.components.iter().enumerate() {
            for i in 0..256 {
                let t = TAU * i as f64 / 256.0;
                if !(comp.speed(t) > 1e-14) {
                    return Err(Error::DegenerateTangent { component: c, t });
                }
            }
        }
        Ok(curve)
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &Component {
        &self.components[c]
    }

    /// Signed curvature of component `c` at parameter `t`.
    pub fn curvature(&self, c: usize, t: f64) -> Result<f64> {
        self.components[c]
            .signed_curvature(t)
            .ok_or(Error::DegenerateTangent { component: c, t })
    }

    /// Evenly spaced parameter samples, `n` per component.
    pub fn samples(&self, n: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.components.len()).flat_map(move |c| (0..n).map(move |i| (c, TAU * i as f64 / n as f64)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(spec: DomainSpec) -> BoundaryCurve {
        BoundaryCurve::new(&spec).unwrap()
    }

    #[test]
    fn disk_is_a_single_circle() {
        let c = curve(DomainSpec::Disk { r: 1.0 });
        assert_eq!(c.component_count(), 1);
        for i in 0..16 {
            let t = TAU * i as f64 / 16.0;
            assert!((c.component(0).point(t).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn annulus_normals_point_out_of_the_domain() {
        let c = curve(DomainSpec::Annulus { r1: 1.0, r2: 2.0 });
        assert_eq!(c.component_count(), 2);
        for i in 0..16 {
            let t = TAU * i as f64 / 16.0;
            let (outer, inner) = (c.component(0), c.component(1));
            assert!(outer.outward_normal(t).dot(&outer.point(t)) > 0.0);
            // Inner circle: normal points into the hole.
            assert!(inner.outward_normal(t).dot(&inner.point(t)) < 0.0);
            assert!((inner.point(t).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn trivial_fourier_matches_the_unit_disk() {
        let f = curve(DomainSpec::Fourier { c0: 1.0, cos: vec![], sin: vec![] });
        let d = curve(DomainSpec::Disk { r: 1.0 });
        for i in 0..64 {
            let t = TAU * i as f64 / 64.0;
            let (a, b) = (f.component(0), d.component(0));
            assert!((a.point(t) - b.point(t)).norm() < 1e-12);
            assert!((a.d1(t) - b.d1(t)).norm() < 1e-12);
            assert!((a.d2(t) - b.d2(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn curvature_examples() {
        let d = curve(DomainSpec::Disk { r: 2.0 });
        for t in [0.0, 1.0, 4.0] {
            assert!((d.curvature(0, t).unwrap() - 0.5).abs() < 1e-15);
        }
        let e = curve(DomainSpec::Ellipse { a: 2.0, b: 1.0 });
        // Oracle: ab / (a^2 sin^2 t + b^2 cos^2 t)^{3/2}.
        let oracle = |t: f64| 2.0 / (4.0 * t.sin().powi(2) + t.cos().powi(2)).powf(1.5);
        assert!((e.curvature(0, 0.0).unwrap() - 2.0).abs() < 1e-14);
        for i in 0..32 {
            let t = TAU * i as f64 / 32.0;
            assert!((e.curvature(0, t).unwrap() - oracle(t)).abs() < 1e-13);
        }
        let a = curve(DomainSpec::Annulus { r1: 1.0, r2: 2.0 });
        assert!((a.curvature(1, 0.7).unwrap() + 1.0).abs() < 1e-15);
        assert!((a.curvature(0, 0.7).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn polar_derivatives_match_finite_differences() {
        let c = curve(DomainSpec::Fourier { c0: 1.0, cos: vec![0.05, 0.1], sin: vec![0.0, 0.07] });
        let comp = c.component(0);
        let h = 1e-5;
        for i in 0..20 {
            let t = 0.31 * i as f64;
            let fd1 = (comp.point(t + h) - comp.point(t - h)) / (2.0 * h);
            let fd2 = (comp.d1(t + h) - comp.d1(t - h)) / (2.0 * h);
            assert!((fd1 - comp.d1(t)).norm() < 1e-8);
            assert!((fd2 - comp.d2(t)).norm() < 1e-8);
        }
    }
}
