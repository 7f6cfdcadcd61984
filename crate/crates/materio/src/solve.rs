//! Dense LU factorization with partial pivoting for the small nodal systems.

use crate::error::{Error, Result};
use crate::num::Real;

/// LU factors of an n-by-n matrix, reusable across right-hand sides.
pub(crate) struct LuFactors<F> {
    lu: Vec<F>,
    perm: Vec<usize>,
    n: usize,
}

impl<F: Real> LuFactors<F> {
    /// Factorizes a row-major matrix; fails on (numerically) singular input.
    pub(crate) fn new(mut a: Vec<F>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_mag = a[perm[col] * n + col].abs();
            for row in (col + 1)..n {
                let mag = a[perm[row] * n + col].abs();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = row;
                }
            }
            if pivot_mag == F::zero() || !pivot_mag.is_finite() {
                return Err(Error::SingularSystem);
            }
            perm.swap(col, pivot_row);
            let p = perm[col];
            let pivot = a[p * n + col];
            for row in (col + 1)..n {
                let r = perm[row];
                let factor = a[r * n + col] / pivot;
                a[r * n + col] = factor;
                for k in (col + 1)..n {
                    let sub = factor * a[p * n + k];
                    a[r * n + k] = a[r * n + k] - sub;
                }
            }
        }
        Ok(LuFactors { lu: a, perm, n })
    }

    /// Solves `A x = b`, returning x in natural (unpermuted) order.
    pub(crate) fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y = vec![F::zero(); n];
        for i in 0..n {
            let r = self.perm[i];
            let mut acc = b[r];
            for k in 0..i {
                acc = acc - self.lu[r * n + k] * y[k];
            }
            y[i] = acc;
        }
        let mut x = vec![F::zero(); n];
        for i in (0..n).rev() {
            let r = self.perm[i];
            let mut acc = y[i];
            for k in (i + 1)..n {
                acc = acc - self.lu[r * n + k] * x[k];
            }
            x[i] = acc / self.lu[r * n + i];
        }
        x
    }
}
