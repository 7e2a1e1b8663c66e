//! Newton's matrix inequality `||A||_F^2 >= tr(A)^2 / n`.

use nalgebra::{DMatrix, Matrix2};

/// `||A||_F^2 - tr(A)^2 / n`, computed as `||A - (tr A / n) I||_F^2` so the
/// result is never negative.
pub fn newton_gap(a: &DMatrix<f64>) -> f64 {
    assert!(a.is_square(), "newton_gap needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let shift = a.trace() / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = a[(i, j)] - if i == j { shift } else { 0.0 };
            s += d * d;
        }
    }
    s
}

pub fn newton_gap2(a: &Matrix2<f64>) -> f64 {
    let d = a[(0, 0)] - a[(1, 1)];
    0.5 * d * d + a[(0, 1)] * a[(0, 1)] + a[(1, 0)] * a[(1, 0)]
}
