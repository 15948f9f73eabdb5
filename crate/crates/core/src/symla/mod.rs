//! Dense real-symmetric linear algebra: Jacobi eigendecomposition, spectral
//! calculus, positive/negative parts and singular values.
//!
//! Everything here is a pure function of its inputs. Matrices are small
//! (`n ≤ 64`), so the routines favour accuracy and simplicity over blocking.

mod jacobi;
mod matrix;

pub use jacobi::{jacobi_eigh, jacobi_eigh_with_tol, SpectralDecomposition, JACOBI_TOL, MAX_SWEEPS};
pub use matrix::{SquareMatrix, SymMatrix, SYMMETRY_TOL};

use crate::error::{Error, Result};

/// A matrix is accepted as PSD when its smallest eigenvalue is at least
/// `-PSD_TOL · max(1, λ_max)`.
pub const PSD_TOL: f64 = 1e-10;

/// Positive and negative parts `C = C₊ − C₋`, both PSD with `C₊C₋ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartsDecomposition {
    pub positive_part: SymMatrix,
    pub negative_part: SymMatrix,
}

/// Scalar power with the continuous extension at zero: `0^q = 0` for
/// `q > 0`, `0^0 = 1`.
pub fn pow0(t: f64, q: f64) -> f64 {
    if t == 0.0 {
        if q == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        t.powf(q)
    }
}

/// `f(M) = V diag(f(λ)) Vᵀ`.
pub fn apply_scalar_function(m: &SymMatrix, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
    jacobi_eigh(m)?.map("scalar function", f)
}

/// Eigendecomposition of a matrix that must be PSD, with round-off negative
/// eigenvalues clipped to zero.
pub fn psd_spectrum(m: &SymMatrix) -> Result<SpectralDecomposition> {
    psd_spectrum_with_tol(m, JACOBI_TOL)
}

pub fn psd_spectrum_with_tol(m: &SymMatrix, tol: f64) -> Result<SpectralDecomposition> {
    let d = jacobi_eigh_with_tol(m, tol)?;
    clip_psd(d)
}

pub(crate) fn clip_psd(d: SpectralDecomposition) -> Result<SpectralDecomposition> {
    let min = d.min_eigenvalue();
    if min < -PSD_TOL * d.max_eigenvalue().max(1.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    if min >= 0.0 {
        return Ok(d);
    }
    let clipped = d.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
    Ok(d.with_eigenvalues(clipped))
}

pub fn is_psd(m: &SymMatrix) -> Result<bool> {
    match psd_spectrum(m) {
        Ok(_) => Ok(true),
        Err(Error::NotPsd { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Splits `M` into its positive and negative parts.
pub fn decompose_parts(m: &SymMatrix) -> Result<PartsDecomposition> {
    let d = jacobi_eigh(m)?;
    Ok(parts_from_spectrum(&d))
}

pub(crate) fn parts_from_spectrum(d: &SpectralDecomposition) -> PartsDecomposition {
    let pos: Vec<f64> = d.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
    let neg: Vec<f64> = d.eigenvalues().iter().map(|&l| (-l).max(0.0)).collect();
    PartsDecomposition {
        positive_part: d.compose(&pos),
        negative_part: d.compose(&neg),
    }
}

/// `|M| = C₊ + C₋`.
pub fn abs_matrix(m: &SymMatrix) -> Result<SymMatrix> {
    jacobi_eigh(m)?.map("abs", f64::abs)
}

/// `Σᵢⱼ XᵢⱼYᵢⱼ`, which equals `Tr(XY)` for symmetric `X`, `Y`.
pub fn trace_product(x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    x.check_same_dim(y)?;
    Ok(x.entries().iter().zip(y.entries()).map(|(a, b)| a * b).sum())
}

/// Singular values, descending.
///
/// Computed as the `n` largest eigenvalues of the symmetric embedding
/// `[[0, M], [Mᵀ, 0]]`, whose spectrum is `±σᵢ`. This keeps full accuracy
/// for small singular values, which forming `MᵀM` would square away.
pub fn singular_values(m: &SquareMatrix) -> Result<Vec<f64>> {
    singular_values_with_tol(m, JACOBI_TOL)
}

pub fn singular_values_with_tol(m: &SquareMatrix, tol: f64) -> Result<Vec<f64>> {
    let n = m.dim();
    let d = jacobi_eigh_with_tol(&m.jordan_wielandt(), tol)?;
    let mut sv: Vec<f64> = d.eigenvalues()[..n].iter().map(|x| x.abs()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Singular values of a symmetric matrix are the absolute eigenvalues.
pub fn symmetric_singular_values(m: &SymMatrix) -> Result<Vec<f64>> {
    let d = jacobi_eigh(m)?;
    let mut sv: Vec<f64> = d.eigenvalues().iter().map(|x| x.abs()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Frobenius norm of `(B+s)⁻¹ − (B+C+s)⁻¹ − (B+s)⁻¹ C (B+C+s)⁻¹`, which
/// vanishes identically.
pub fn resolvent_residual(b: &SymMatrix, c: &SymMatrix, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "resolvent shift must be positive, got {s}"
        )));
    }
    b.check_same_dim(c)?;
    psd_spectrum(b)?;
    psd_spectrum(c)?;
    let inv_b = resolvent(b, s)?;
    let inv_bc = resolvent(&(b + c), s)?;
    let lhs = (&inv_b - &inv_bc).to_square();
    let rhs = inv_b.to_square().matmul(&c.to_square()).matmul(&inv_bc.to_square());
    Ok((&lhs - &rhs).frobenius_norm())
}

/// `(M + s)⁻¹` for PSD `M` and `s > 0`.
///
/// The eigensolver runs 100× tighter than usual: leftover off-diagonal mass
/// is amplified by up to `1/s²` in products of two resolvents.
pub fn resolvent(m: &SymMatrix, s: f64) -> Result<SymMatrix> {
    psd_spectrum_with_tol(m, JACOBI_TOL * 1e-2)?.map("resolvent", |l| 1.0 / (l + s))
}
