//! Periodic tridiagonal matrices.

use crate::error::{Error, Result};

/// Row `i` reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`, indices mod `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicTridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PeriodicTridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n < 3 || lower.len() != n || upper.len() != n {
            return Err(Error::InvalidParameter("periodic tridiagonal bands need equal length >= 3".into()));
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let prev = if i == 0 { n - 1 } else { i - 1 };
                let next = if i + 1 == n { 0 } else { i + 1 };
                self.lower[i] * x[prev] + self.diag[i] * x[i] + self.upper[i] * x[next]
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.len();
        // (A^T)[i][i-1] = A[i-1][i] = upper[i-1]; (A^T)[i][i+1] = A[i+1][i] = lower[i+1]
        let lower = (0..n).map(|i| self.upper[(i + n - 1) % n]).collect();
        let upper = (0..n).map(|i| self.lower[(i + 1) % n]).collect();
        Self { lower, diag: self.diag.clone(), upper }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.lower[i] + self.diag[i] + self.upper[i]).collect()
    }

    /// Positive diagonal and nonpositive off-diagonal entries.
    pub fn has_m_matrix_signs(&self) -> bool {
        (0..self.len()).all(|i| self.diag[i] > 0.0 && self.lower[i] <= 0.0 && self.upper[i] <= 0.0)
    }

    /// `diag_i >= |lower_i| + |upper_i|` on every row.
    pub fn is_diagonally_dominant(&self) -> bool {
        (0..self.len()).all(|i| self.diag[i] >= self.lower[i].abs() + self.upper[i].abs())
    }

    /// Direct elimination that keeps the wrap-around coupling in a spike column and a
    /// bottom row. For M-matrices every update adds terms of one sign, so a nonnegative
    /// right-hand side yields a nonnegative solution.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::LinearSolveFailure("right-hand side has wrong length".into()));
        }
        let last = n - 1;
        let mut diag = self.diag.clone();
        let sup = &self.upper;
        let mut spike = vec![0.0; last];
        let mut bottom = vec![0.0; last];
        let mut b = rhs.to_vec();
        spike[0] += self.lower[0];
        spike[last - 1] += self.upper[last - 1];
        bottom[0] += self.upper[last];
        bottom[last - 1] += self.lower[last];
        let mut corner = self.diag[last];

        for i in 0..last {
            let d = diag[i];
            if !(d.abs() > 0.0) || !d.is_finite() {
                return Err(Error::LinearSolveFailure(format!("zero pivot at row {i}")));
            }
            let m = bottom[i] / d;
            corner -= m * spike[i];
            b[last] -= m * b[i];
            if i + 1 < last {
                bottom[i + 1] -= m * sup[i];
                let l = self.lower[i + 1] / d;
                diag[i + 1] -= l * sup[i];
                spike[i + 1] -= l * spike[i];
                b[i + 1] -= l * b[i];
            }
        }
        if !(corner.abs() > 0.0) || !corner.is_finite() {
            return Err(Error::LinearSolveFailure("zero pivot in the corner".into()));
        }
        let mut x = vec![0.0; n];
        x[last] = b[last] / corner;
        x[last - 1] = (b[last - 1] - spike[last - 1] * x[last]) / diag[last - 1];
        for i in (0..last - 1).rev() {
            x[i] = (b[i] - sup[i] * x[i + 1] - spike[i] * x[last]) / diag[i];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolveFailure("non-finite solution".into()));
        }
        Ok(x)
    }

    /// [`solve`](Self::solve) followed by steps of iterative refinement.
    pub fn solve_refined(&self, rhs: &[f64], steps: usize) -> Result<Vec<f64>> {
        let mut x = self.solve(rhs)?;
        for _ in 0..steps {
            let ax = self.matvec(&x);
            let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let dx = self.solve(&r)?;
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dense(a: &PeriodicTridiagonal) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][(i + n - 1) % n] += a.lower[i];
            m[i][i] += a.diag[i];
            m[i][(i + 1) % n] += a.upper[i];
        }
        m
    }

    #[test]
    fn transpose_matches_dense() {
        let a = PeriodicTridiagonal::new(
            vec![-1.0, -2.0, -3.0, -4.0],
            vec![10.0, 11.0, 12.0, 13.0],
            vec![-5.0, -6.0, -7.0, -8.0],
        )
        .unwrap();
        let d = dense(&a);
        let t = dense(&a.transpose());
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(d[i][j], t[j][i]);
            }
        }
    }

    #[test]
    fn solves_circulant_system() {
        let n = 9;
        let a = PeriodicTridiagonal::new(vec![-1.0; n], vec![2.5; n], vec![-1.0; n]).unwrap();
        let x = a.solve(&vec![1.0; n]).unwrap();
        for v in x {
            assert_abs_diff_eq!(v, 2.0, epsilon = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn solve_inverts_m_matrices(
            n in 3usize..40,
            seed in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 1e-3f64..1.0, -1.0f64..1.0), 40)
        ) {
            let lower: Vec<f64> = seed[..n].iter().map(|s| -s.0).collect();
            let upper: Vec<f64> = seed[..n].iter().map(|s| -s.1).collect();
            let diag: Vec<f64> = seed[..n].iter().enumerate()
                .map(|(i, s)| -lower[i] - upper[i] + s.2).collect();
            let rhs: Vec<f64> = seed[..n].iter().map(|s| s.3).collect();
            let a = PeriodicTridiagonal::new(lower, diag, upper).unwrap();
            let x = a.solve_refined(&rhs, 1).unwrap();
            let ax = a.matvec(&x);
            for (l, r) in ax.iter().zip(&rhs) {
                prop_assert!((l - r).abs() < 1e-9);
            }
        }

        #[test]
        fn m_matrix_solution_is_nonnegative(
            n in 3usize..40,
            seed in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 1e-4f64..0.1, 0.0f64..1.0), 40)
        ) {
            let lower: Vec<f64> = seed[..n].iter().map(|s| -s.0).collect();
            let upper: Vec<f64> = seed[..n].iter().map(|s| -s.1).collect();
            let diag: Vec<f64> = seed[..n].iter().enumerate()
                .map(|(i, s)| -lower[i] - upper[i] + s.2).collect();
            let rhs: Vec<f64> = seed[..n].iter().map(|s| s.3).collect();
            let a = PeriodicTridiagonal::new(lower, diag, upper).unwrap().transpose();
            let x = a.solve(&rhs).unwrap();
            prop_assert!(x.iter().all(|&v| v >= 0.0));
        }
    }
}
