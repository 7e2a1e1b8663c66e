//! Adaptive Gauss–Legendre quadrature and bracketed bisection.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Number of Gauss–Legendre nodes per panel.
const ORDER: usize = 15;
/// Maximum bisection depth before giving up on a panel.
const MAX_DEPTH: u32 = 48;

/// Requested accuracy for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Tolerance { rel, abs: 1e-300 }
    }

    pub const fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }
}

struct Rule {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        let n = ORDER as f64;
        for i in 0..ORDER {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(ORDER, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(ORDER, x);
            dp = if d != 0.0 { d } else { dp };
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Rule { nodes, weights }
    })
}

/// Legendre polynomial P_n(x) and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-order Gauss–Legendre estimate on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in r.nodes.iter().zip(r.weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrates `f` over `[a, b]` by Gauss–Legendre panels with interval
/// bisection until successive refinements agree to `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = gauss_legendre(&f, a, b);
    let scale = whole.abs().max(tol.abs / tol.rel.max(f64::MIN_POSITIVE));
    let mut total = Summation::default();
    let mut worst = 0.0f64;
    let mut converged = true;
    // Explicit stack: (a, b, estimate, depth).
    let mut stack = vec![(a, b, whole, 0u32)];
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let m = 0.5 * (lo + hi);
        let left = gauss_legendre(&f, lo, m);
        let right = gauss_legendre(&f, m, hi);
        let refined = left + right;
        let err = (refined - est).abs();
        let allowed = (tol.rel * scale).max(tol.abs) * ((hi - lo) / (b - a)).abs();
        if err <= allowed || err <= 4.0 * f64::EPSILON * refined.abs() {
            total.add(refined);
        } else if depth >= MAX_DEPTH {
            converged = false;
            worst = worst.max(err / scale.max(f64::MIN_POSITIVE));
            total.add(refined);
        } else {
            stack.push((m, hi, right, depth + 1));
            stack.push((lo, m, left, depth + 1));
        }
    }
    if !converged {
        return Err(Error::Quadrature {
            requested: tol.rel,
            achieved: worst,
        });
    }
    Ok(total.value())
}

/// Finds a root of `g` on `[lo, hi]` by bisection. The endpoints must
/// bracket a sign change.
pub fn bisect<G: FnMut(f64) -> Result<f64>>(
    mut g: G,
    mut lo: f64,
    mut hi: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::Bracket { lo, hi, g_lo, g_hi });
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid)?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Summation {
    sum: f64,
    comp: f64,
}

impl Summation {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::Sum<f64> for Summation {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut s = Summation::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().sum::<Summation>().value()
}
