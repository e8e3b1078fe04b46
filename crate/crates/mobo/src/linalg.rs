//! Minimal dense linear algebra for symmetric positive-definite systems.
//!
//! The surrogate module only needs Cholesky factorisation, triangular
//! solves, log-determinants and explicit inverses of kernel matrices
//! (n up to a few hundred), so a small row-major implementation is both
//! sufficient and easy to audit.

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`, stored row-major.
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl std::fmt::Debug for Cholesky {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cholesky(n = {})", self.n)
    }
}

impl Cholesky {
    /// Factors the symmetric matrix `a` (row-major, `n x n`). Returns
    /// `None` if a non-positive pivot appears, i.e. the matrix is not
    /// numerically positive definite.
    pub fn decompose(a: &[f64], n: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(sum > 0.0) || !sum.is_finite() {
                        return None;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(Cholesky { n, l })
    }

    /// Solves `L z = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = b.to_vec();
        for i in 0..n {
            let mut sum = z[i];
            for k in 0..i {
                sum -= self.l[i * n + k] * z[k];
            }
            z[i] = sum / self.l[i * n + i];
        }
        z
    }

    /// Solves `A x = b` via the two triangular systems.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = self.solve_lower(b);
        for i in (0..n).rev() {
            let mut sum = x[i];
            for k in (i + 1)..n {
                sum -= self.l[k * n + i] * x[k];
            }
            x[i] = sum / self.l[i * n + i];
        }
        x
    }

    /// `ln det A = 2 * sum(ln L_ii)`.
    pub fn log_det(&self) -> f64 {
        (0..self.n).map(|i| self.l[i * self.n + i].ln()).sum::<f64>() * 2.0
    }

    /// Explicit inverse `A^{-1}` (row-major), used for likelihood
    /// gradients where the full matrix is contracted against another.
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        // First invert L in place (forward substitution per column), then
        // form A^{-1} = L^{-T} L^{-1}.
        let mut linv = vec![0.0; n * n];
        for j in 0..n {
            linv[j * n + j] = 1.0 / self.l[j * n + j];
            for i in (j + 1)..n {
                let mut sum = 0.0;
                for k in j..i {
                    sum -= self.l[i * n + k] * linv[k * n + j];
                }
                linv[i * n + j] = sum / self.l[i * n + i];
            }
        }
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = 0.0;
                // (L^{-T} L^{-1})_{ij} = sum_k L^{-1}_{ki} L^{-1}_{kj},
                // non-zero only for k >= max(i, j) = i.
                for k in i..n {
                    sum += linv[k * n + i] * linv[k * n + j];
                }
                inv[i * n + j] = sum;
                inv[j * n + i] = sum;
            }
        }
        inv
    }
}
