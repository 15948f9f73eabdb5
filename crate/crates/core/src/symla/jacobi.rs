use crate::error::{Error, Result};

use super::matrix::SymMatrix;

/// Default convergence threshold: off-diagonal Frobenius norm relative to `‖M‖_F`.
pub const JACOBI_TOL: f64 = 1e-12;
/// Hard cap on cyclic sweeps.
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues sorted descending with orthonormal eigenvectors.
///
/// `eigenvectors` is row-major `dim × dim`; column `k` pairs with
/// `eigenvalues[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Entry `(row, k)` of the eigenvector matrix.
    pub fn eigenvector(&self, row: usize, k: usize) -> f64 {
        self.eigenvectors[row * self.dim() + k]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `V diag(values) Vᵀ` for arbitrary per-eigenvalue `values`.
    pub fn compose(&self, values: &[f64]) -> SymMatrix {
        let n = self.dim();
        assert_eq!(values.len(), n);
        let v = &self.eigenvectors;
        SymMatrix::from_upper(n, |i, j| {
            (0..n).map(|k| v[i * n + k] * values[k] * v[j * n + k]).sum()
        })
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.compose(&self.eigenvalues)
    }

    /// `‖VᵀV − I‖_F`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|r| v[r * n + a] * v[r * n + b]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                acc += (dot - target) * (dot - target);
            }
        }
        acc.sqrt()
    }

    /// Spectral calculus: `V diag(f(λ)) Vᵀ`. Any non-finite `f(λ)` is a
    /// domain error.
    pub fn map(&self, name: &str, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&l| {
                let y = f(l);
                if y.is_finite() {
                    Ok(y)
                } else {
                    Err(Error::Domain {
                        function: name.to_string(),
                        at: l,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.compose(&values))
    }

    pub(crate) fn with_eigenvalues(&self, eigenvalues: Vec<f64>) -> Self {
        SpectralDecomposition {
            eigenvalues,
            eigenvectors: self.eigenvectors.clone(),
        }
    }
}

/// Cyclic Jacobi eigensolver at the default tolerance.
pub fn jacobi_eigh(m: &SymMatrix) -> Result<SpectralDecomposition> {
    jacobi_eigh_with_tol(m, JACOBI_TOL)
}

/// Cyclic Jacobi eigensolver; converged once the off-diagonal Frobenius norm
/// is at most `tol · ‖M‖_F`.
pub fn jacobi_eigh_with_tol(m: &SymMatrix, tol: f64) -> Result<SpectralDecomposition> {
    let n = m.dim();
    let mut a = m.entries().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let target = tol * m.frobenius_norm();

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        s.sqrt()
    };

    let mut sweep = 0;
    loop {
        let off = off_norm(&a);
        if off <= target || off == 0.0 {
            break;
        }
        if sweep == MAX_SWEEPS {
            return Err(Error::NotConverged {
                sweeps: sweep,
                off_norm: off,
            });
        }
        sweep += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Negligible against both diagonal entries: drop it.
                if sweep > 4 && app.abs() + 1e2 * apq.abs() == app.abs() && aqq.abs() + 1e2 * apq.abs() == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[r * n + p];
                        let arq = a[r * n + q];
                        let new_rp = c * arp - s * arq;
                        let new_rq = s * arp + c * arq;
                        a[r * n + p] = new_rp;
                        a[p * n + r] = new_rp;
                        a[r * n + q] = new_rq;
                        a[q * n + r] = new_rq;
                    }
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let eigenvalues = order.iter().map(|&k| a[k * n + k]).collect();
    let mut eigenvectors = vec![0.0; n * n];
    for (new_k, &old_k) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[r * n + new_k] = v[r * n + old_k];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        // λ² − 4λ + 3 = 0  ⇒  λ ∈ {3, 1}
        let m = sym(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let d = jacobi_eigh(&m).unwrap();
        let (tr, det) = (4.0_f64, 3.0_f64);
        let disc = (tr * tr - 4.0 * det).sqrt();
        assert!((d.eigenvalues()[0] - (tr + disc) / 2.0).abs() < 1e-14);
        assert!((d.eigenvalues()[1] - (tr - disc) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn identity_is_fixed() {
        let d = jacobi_eigh(&SymMatrix::identity(3)).unwrap();
        assert_eq!(d.eigenvalues(), &[1.0, 1.0, 1.0]);
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(d.eigenvector(i, k), if i == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn diagonal_is_sorted_descending() {
        let d = jacobi_eigh(&SymMatrix::diag(&[5.0, 2.0, 7.0])).unwrap();
        assert_eq!(d.eigenvalues(), &[7.0, 5.0, 2.0]);
        assert_eq!(d.eigenvector(2, 0), 1.0);
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let d = jacobi_eigh(&SymMatrix::zeros(4)).unwrap();
        assert!(d.eigenvalues().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn tight_tolerance_still_converges() {
        let m = SymMatrix::from_upper(6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let d = jacobi_eigh_with_tol(&m, 1e-14).unwrap();
        let err = (&d.reconstruct() - &m).frobenius_norm();
        assert!(err < 1e-13, "{err}");
        assert!(d.orthogonality_error() < 1e-13);
    }

    #[test]
    fn map_reports_domain_errors() {
        let d = jacobi_eigh(&SymMatrix::diag(&[1.0, -1.0])).unwrap();
        let err = d.map("sqrt", f64::sqrt).unwrap_err();
        assert!(matches!(err, Error::Domain { at, .. } if at == -1.0));
    }
}
