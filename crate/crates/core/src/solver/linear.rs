//! Sparse symmetric positive-definite solves.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Side};

use crate::error::{Error, Result};

/// Lower-triangle triplets of an `n x n` SPD matrix. Repeated entries are summed.
#[derive(Clone, Debug, Default)]
pub struct SpdTriplets {
    n: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl SpdTriplets {
    pub fn new(n: usize) -> Self {
        SpdTriplets { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        SpdTriplets { n, entries: Vec::with_capacity(cap) }
    }

    /// Adds `value` at `(i, j)`; entries above the diagonal are ignored so
    /// callers can add full symmetric element matrices.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        if i >= j {
            self.entries.push(Triplet::new(i, j, value));
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[cfg(test)]
    pub(crate) fn entries_for_test(&self) -> Vec<(usize, usize, f64)> {
        self.entries.iter().map(|t| (t.row, t.col, t.val)).collect()
    }

    /// Solves `A x = rhs` by sparse Cholesky.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: rhs.len() });
        }
        if self.n == 0 {
            return Ok(Vec::new());
        }
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(self.n, self.n, &self.entries)
            .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        let llt = a.sp_cholesky(Side::Lower).map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        let mut x = Col::<f64>::from_fn(self.n, |i| rhs[i]);
        llt.solve_in_place(x.as_mat_mut());
        let out: Vec<f64> = (0..self.n).map(|i| x[i]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolve("non-finite solution".into()));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_system() {
        let n = 50;
        let mut a = SpdTriplets::new(n);
        for i in 0..n {
            a.add(i, i, 1.0);
            a.add(i, i, 1.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
                a.add(i - 1, i, -1.0);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = 2.0 * x_true[i] - if i > 0 { x_true[i - 1] } else { 0.0 } - if i + 1 < n { x_true[i + 1] } else { 0.0 };
        }
        let x = a.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut a = SpdTriplets::new(2);
        a.add(0, 0, 1.0);
        a.add(1, 1, -1.0);
        assert!(matches!(a.solve(&[1.0, 1.0]), Err(Error::LinearSolve(_))));
    }
}
