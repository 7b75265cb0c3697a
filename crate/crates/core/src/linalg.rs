//! Small dense linear algebra: row-major square matrices and a Cholesky
//! factorization used for Mahalanobis distances.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor `L` of a symmetric positive-definite
/// matrix `A = L Lᵀ`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky<T> {
    dim: usize,
    lower: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factorizes a row-major `dim × dim` matrix. Only the lower triangle is read.
    pub fn factor(matrix: &[T], dim: usize) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: matrix.len() });
        }
        let mut lower = vec![T::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut acc = matrix[i * dim + j];
                for k in 0..j {
                    acc = acc - lower[i * dim + k] * lower[j * dim + k];
                }
                if i == j {
                    if !(acc > T::zero()) || !acc.is_finite() {
                        return Err(Error::NotPositiveDefinite);
                    }
                    lower[i * dim + i] = acc.sqrt();
                } else {
                    lower[i * dim + j] = acc / lower[j * dim + j];
                }
            }
        }
        Ok(Self { dim, lower })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `L y = b` by forward substitution.
    pub fn solve_lower(&self, rhs: &[T]) -> Vec<T> {
        let n = self.dim;
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut acc = rhs[i];
            for (k, &yk) in y.iter().enumerate().take(i) {
                acc = acc - self.lower[i * n + k] * yk;
            }
            y[i] = acc / self.lower[i * n + i];
        }
        y
    }

    /// Quadratic form `vᵀ A⁻¹ v` without forming the inverse.
    pub fn inverse_quadratic_form(&self, v: &[T]) -> T {
        self.solve_lower(v).iter().fold(T::zero(), |acc, &y| acc + y * y)
    }
}

/// Sample mean and covariance (denominator `n − 1`) of equal-length rows.
pub fn mean_and_covariance<T: Scalar>(rows: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let n = rows.len();
    let dim = rows.first().map_or(0, Vec::len);
    let mut mean = vec![T::zero(); dim];
    for row in rows {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m = *m + x;
        }
    }
    let nt = T::from_count(n.max(1));
    for m in &mut mean {
        *m = *m / nt;
    }
    let mut cov = vec![T::zero(); dim * dim];
    for row in rows {
        for i in 0..dim {
            let di = row[i] - mean[i];
            for j in 0..=i {
                cov[i * dim + j] = cov[i * dim + j] + di * (row[j] - mean[j]);
            }
        }
    }
    let denom = T::from_count(n.saturating_sub(1).max(1));
    for i in 0..dim {
        for j in 0..=i {
            let v = cov[i * dim + j] / denom;
            cov[i * dim + j] = v;
            cov[j * dim + i] = v;
        }
    }
    (mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reconstructs_matrix() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0_f64];
        let ch = Cholesky::factor(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += ch.lower[i * 3 + k] * ch.lower[j * 3 + k];
                }
                assert!((acc - a[i * 3 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0_f64];
        assert_eq!(Cholesky::factor(&a, 2), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn covariance_of_two_points() {
        let rows = vec![vec![0.0, 1.0], vec![2.0, 3.0_f64]];
        let (mean, cov) = mean_and_covariance(&rows);
        assert_eq!(mean, vec![1.0, 2.0]);
        assert_eq!(cov, vec![2.0, 2.0, 2.0, 2.0]);
    }
}
