//! Symmetric tridiagonal systems, the only linear algebra the radial
//! assembly needs.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diag[i]` on the diagonal and `off[i]`
/// coupling rows `i` and `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Adds `coef * (e_i - e_{i+1})(e_i - e_{i+1})^T`.
    pub fn add_edge(&mut self, i: usize, coef: f64) {
        self.diag[i] += coef;
        self.diag[i + 1] += coef;
        self.off[i] -= coef;
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Thomas algorithm. No pivoting; fails on a vanishing or non-finite pivot.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let scale = self.diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut pivot = self.diag[0];
        if !(pivot.abs() > 1e-300 + 1e-15 * scale) || !pivot.is_finite() {
            return Err(Error::Singular(0));
        }
        if n > 1 {
            c[0] = self.off[0] / pivot;
        }
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.off[i - 1] * c[i - 1];
            if !(pivot.abs() > 1e-300 + 1e-15 * scale) || !pivot.is_finite() {
                return Err(Error::Singular(i));
            }
            if i + 1 < n {
                c[i] = self.off[i] / pivot;
            }
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_inverts_mul() {
        let mut t = Tridiagonal::zeros(6);
        for i in 0..5 {
            t.add_edge(i, 1.0 + i as f64);
        }
        t.diag[5] += 2.0;
        let x: Vec<f64> = (0..6).map(|i| (i as f64).cos()).collect();
        let b = t.mul(&x);
        let y = t.solve(&b).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let mut t = Tridiagonal::zeros(3);
        t.add_edge(0, 1.0);
        t.add_edge(1, 1.0);
        assert!(t.solve(&[1.0, 0.0, -1.0]).is_err());
    }
}
