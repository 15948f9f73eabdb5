//! Oriented gaps for the trace inequalities.
//!
//! Each gap is arranged so that a nonnegative value means the inequality
//! holds. A [`GapReport`] keeps both sides, the gap, a gap normalized by
//! `max(1, |lhs|, |rhs|)`, and a verdict under a relative tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcat::{FunctionClass, OperatorFunction};
use crate::symla::{
    jacobi_eigh_with_tol, parts_from_spectrum, pow0, psd_spectrum_with_tol, trace_product, SpectralDecomposition,
    SymMatrix, JACOBI_TOL,
};

/// Default relative tolerance for verdicts.
pub const GAP_TOL: f64 = 1e-9;
/// `A ⪰ B` is detected as `λ_min(A − B) ≥ −ORDER_TOL`.
pub const ORDER_TOL: f64 = 1e-10;
/// Smallest eigenvalue required of `B` in Klein's inequality when `f′`
/// does not extend to zero.
pub const KLEIN_MIN_EIGENVALUE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Equality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub relative_gap: f64,
    pub verdict: Verdict,
}

impl GapReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, gap: f64) -> Self {
        let relative_gap = gap / 1f64.max(lhs.abs()).max(rhs.abs());
        let mut r = GapReport {
            name: name.into(),
            lhs,
            rhs,
            gap,
            relative_gap,
            verdict: Verdict::Holds,
        };
        r.verdict = r.verdict_at(GAP_TOL);
        r
    }

    /// Recomputes the verdict under tolerance `eps`.
    pub fn with_tolerance(mut self, eps: f64) -> Self {
        self.verdict = self.verdict_at(eps);
        self
    }

    fn verdict_at(&self, eps: f64) -> Verdict {
        if self.relative_gap.abs() <= eps {
            Verdict::Equality
        } else if self.relative_gap < -eps {
            Verdict::Violated
        } else {
            Verdict::Holds
        }
    }

    fn forced(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }
}

fn check_p(p: f64, min: f64, what: &str) -> Result<()> {
    if !(p >= min && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} must be a finite value >= {min}, got {p}")));
    }
    Ok(())
}

/// Scalar power inequality: for `p ≥ 2` and `a ≥ b`,
/// `(a−b)(a^{p−1}−b^{p−1}) ≥ (a−b)^p`; reversed for `p ∈ [1, 2)`.
///
/// In the reversed range `a < b` is allowed and the right side is read as
/// `|a−b|^p`.
pub fn scalar_power_gap(a: f64, b: f64, p: f64) -> Result<GapReport> {
    check_p(p, 1.0, "p")?;
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::InvalidParameter(format!("a and b must be nonnegative, got {a}, {b}")));
    }
    let lhs = (a - b) * (pow0(a, p - 1.0) - pow0(b, p - 1.0));
    let rhs = pow0((a - b).abs(), p);
    if p >= 2.0 {
        if a < b {
            return Err(Error::InvalidParameter(format!("p >= 2 requires a >= b, got a = {a}, b = {b}")));
        }
        let r = GapReport::new("scalar_power", lhs, rhs, lhs - rhs);
        Ok(if p == 2.0 { r.forced(Verdict::Equality) } else { r })
    } else {
        Ok(GapReport::new("scalar_power", lhs, rhs, rhs - lhs))
    }
}

/// A validated pair of PSD matrices with the spectral data every gap needs.
#[derive(Clone, Debug)]
pub struct PsdPair {
    a: SymMatrix,
    b: SymMatrix,
    diff: SymMatrix,
    spec_a: SpectralDecomposition,
    spec_b: SpectralDecomposition,
    spec_diff: SpectralDecomposition,
    tol: f64,
}

impl PsdPair {
    pub fn new(a: &SymMatrix, b: &SymMatrix) -> Result<Self> {
        Self::with_tol(a, b, JACOBI_TOL)
    }

    /// Same as [`PsdPair::new`] with an explicit Jacobi tolerance.
    pub fn with_tol(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<Self> {
        a.check_same_dim(b)?;
        let spec_a = psd_spectrum_with_tol(a, tol)?;
        let spec_b = psd_spectrum_with_tol(b, tol)?;
        let diff = a - b;
        let spec_diff = jacobi_eigh_with_tol(&diff, tol)?;
        Ok(PsdPair {
            a: a.clone(),
            b: b.clone(),
            diff,
            spec_a,
            spec_b,
            spec_diff,
            tol,
        })
    }

    pub fn a(&self) -> &SymMatrix {
        &self.a
    }

    pub fn b(&self) -> &SymMatrix {
        &self.b
    }

    /// `C = A − B`.
    pub fn diff(&self) -> &SymMatrix {
        &self.diff
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn spectrum_a(&self) -> &SpectralDecomposition {
        &self.spec_a
    }

    pub fn spectrum_b(&self) -> &SpectralDecomposition {
        &self.spec_b
    }

    /// Eigendecomposition of `A − B`.
    pub fn spectrum_diff(&self) -> &SpectralDecomposition {
        &self.spec_diff
    }

    /// Absolute eigenvalues of `A − B`, i.e. the spectrum of `|A − B|`.
    pub fn abs_diff_eigenvalues(&self) -> Vec<f64> {
        self.spec_diff.eigenvalues().iter().map(|x| x.abs()).collect()
    }

    pub fn is_ordered(&self) -> bool {
        self.spec_diff.min_eigenvalue() >= -ORDER_TOL
    }

    fn power_a(&self, q: f64) -> Result<SymMatrix> {
        self.spec_a.map("power", |t| pow0(t, q))
    }

    fn power_b(&self, q: f64) -> Result<SymMatrix> {
        self.spec_b.map("power", |t| pow0(t, q))
    }

    /// `Tr((A−B)(A^{p−1} − B^{p−1}))`.
    pub fn ricard_middle(&self, p: f64) -> Result<f64> {
        let d = &self.power_a(p - 1.0)? - &self.power_b(p - 1.0)?;
        trace_product(&self.diff, &d)
    }

    /// `Tr(|A−B|^p)`.
    pub fn trace_abs_diff_power(&self, p: f64) -> f64 {
        self.abs_diff_eigenvalues().iter().map(|&c| pow0(c, p)).sum()
    }

    /// `Tr|A^p − B^p|`.
    pub fn trace_abs_power_diff(&self, p: f64) -> Result<f64> {
        let d = &self.power_a(p)? - &self.power_b(p)?;
        let spec = jacobi_eigh_with_tol(&d, self.tol)?;
        Ok(spec.eigenvalues().iter().map(|x| x.abs()).sum())
    }

    /// `Tr((A−B)(f(A) − f(B)))`.
    pub fn trace_diff_product(&self, f: &OperatorFunction) -> Result<f64> {
        let d = &f.apply(&self.spec_a)? - &f.apply(&self.spec_b)?;
        trace_product(&self.diff, &d)
    }

    /// `Tr(|A−B| f(|A−B|))`.
    pub fn trace_abs_diff_weighted(&self, f: &OperatorFunction) -> f64 {
        self.abs_diff_eigenvalues().iter().map(|&c| c * f.value(c)).sum()
    }

    pub fn ricard_gap(&self, p: f64) -> Result<GapReport> {
        check_p(p, 1.0, "p")?;
        let lhs = self.ricard_middle(p)?;
        let rhs = self.trace_abs_diff_power(p);
        if p == 2.0 {
            Ok(GapReport::new("ricard", lhs, rhs, lhs - rhs).forced(Verdict::Equality))
        } else if p > 2.0 {
            Ok(GapReport::new("ricard", lhs, rhs, lhs - rhs))
        } else {
            Ok(GapReport::new("ricard", lhs, rhs, rhs - lhs))
        }
    }

    /// Left half of the interpolation chain, valid for every `p ≥ 1`.
    pub fn chain_left_gap(&self, p: f64) -> Result<GapReport> {
        check_p(p, 1.0, "p")?;
        let left = self.trace_abs_power_diff(p)?;
        let middle = self.ricard_middle(p)?;
        Ok(GapReport::new("chain_left", left, middle, left - middle))
    }

    pub fn interpolation_chain(&self, p: f64) -> Result<InterpolationChain> {
        check_p(p, 2.0, "p for the full chain")?;
        let left = self.trace_abs_power_diff(p)?;
        let middle = self.ricard_middle(p)?;
        let right = self.trace_abs_diff_power(p);
        Ok(InterpolationChain {
            left,
            middle,
            right,
            left_gap: GapReport::new("chain_left", left, middle, left - middle),
            right_gap: GapReport::new("chain_right", middle, right, middle - right),
        })
    }

    pub fn powers_stormer_gap(&self, s: f64) -> Result<GapReport> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!("s must lie in [0, 1], got {s}")));
        }
        let abs_trace: f64 = self.abs_diff_eigenvalues().iter().sum();
        let lhs = self.a.trace() + self.b.trace() - abs_trace;
        let rhs = 2.0 * trace_product(&self.power_a(s)?, &self.power_b(1.0 - s)?)?;
        Ok(GapReport::new("powers_stormer", lhs, rhs, rhs - lhs))
    }

    pub fn klein_gap(&self, f: &OperatorFunction) -> Result<GapReport> {
        require_class(f, FunctionClass::Convex)?;
        if !f.derivative_extends_to_zero() && self.spec_b.min_eigenvalue() <= KLEIN_MIN_EIGENVALUE {
            return Err(Error::Domain {
                function: format!("{}'", f.name()),
                at: self.spec_b.min_eigenvalue(),
            });
        }
        let lhs = f.apply(&self.spec_a)?.trace() - f.apply(&self.spec_b)?.trace();
        let rhs = trace_product(&self.diff, &f.apply_derivative(&self.spec_b)?)?;
        Ok(GapReport::new("klein", lhs, rhs, lhs - rhs))
    }

    pub fn monotone_gap(&self, f: &OperatorFunction) -> Result<GapReport> {
        let f = require_class(f, FunctionClass::Monotone)?;
        let lhs = self.trace_diff_product(&f)?;
        let rhs = self.trace_abs_diff_weighted(&f);
        Ok(GapReport::new("monotone", lhs, rhs, rhs - lhs))
    }

    pub fn convex_gap(&self, f: &OperatorFunction) -> Result<GapReport> {
        let f = require_class(f, FunctionClass::Convex)?;
        let lhs = self.trace_diff_product(&f)?;
        let rhs = self.trace_abs_diff_weighted(&f);
        Ok(GapReport::new("convex", lhs, rhs, lhs - rhs))
    }

    pub fn zee_decomposition(&self) -> Result<ZeeDecomposition> {
        let parts = parts_from_spectrum(&self.spec_diff);
        let z = &self.a + &parts.negative_part;
        Ok(ZeeDecomposition {
            spec_z: psd_spectrum_with_tol(&z, self.tol)?,
            z,
            c_plus: parts.positive_part,
            c_minus: parts.negative_part,
        })
    }
}

/// Accepts `f` in `class`, converting `t ↦ t` between classes.
fn require_class(f: &OperatorFunction, class: FunctionClass) -> Result<OperatorFunction> {
    f.in_class(class).ok_or_else(|| {
        Error::InvalidParameter(format!("`{}` is {}, expected a {} function", f.name(), f.class(), class))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationChain {
    /// `Tr|A^p − B^p|`
    pub left: f64,
    /// `Tr((A−B)(A^{p−1} − B^{p−1}))`
    pub middle: f64,
    /// `Tr(|A−B|^p)`
    pub right: f64,
    pub left_gap: GapReport,
    pub right_gap: GapReport,
}

/// `Z = A + C₋ = B + C₊` for `C = A − B`.
#[derive(Clone, Debug)]
pub struct ZeeDecomposition {
    pub z: SymMatrix,
    pub c_plus: SymMatrix,
    pub c_minus: SymMatrix,
    spec_z: SpectralDecomposition,
}

/// The four traces whose sum is `Tr((A−B)(f(A)−f(B)))`:
///
/// ```text
/// t₁ = Tr((A−Z)(f(A)−f(Z)))    t₂ = Tr((A−Z)(f(Z)−f(B)))
/// t₃ = Tr((Z−B)(f(Z)−f(B)))    t₄ = Tr((Z−B)(f(A)−f(Z)))
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossTerms {
    pub terms: [f64; 4],
}

impl CrossTerms {
    pub fn sum(&self) -> f64 {
        self.terms.iter().sum()
    }
}

impl ZeeDecomposition {
    pub fn terms(&self, pair: &PsdPair, f: &OperatorFunction) -> Result<CrossTerms> {
        let fa = f.apply(&pair.spec_a)?;
        let fb = f.apply(&pair.spec_b)?;
        let fz = f.apply(&self.spec_z)?;
        let a_z = pair.a() - &self.z;
        let z_b = &self.z - pair.b();
        let fa_fz = &fa - &fz;
        let fz_fb = &fz - &fb;
        Ok(CrossTerms {
            terms: [
                trace_product(&a_z, &fa_fz)?,
                trace_product(&a_z, &fz_fb)?,
                trace_product(&z_b, &fz_fb)?,
                trace_product(&z_b, &fa_fz)?,
            ],
        })
    }
}

pub fn ricard_gap(a: &SymMatrix, b: &SymMatrix, p: f64) -> Result<GapReport> {
    check_p(p, 1.0, "p")?;
    PsdPair::new(a, b)?.ricard_gap(p)
}

pub fn interpolation_chain(a: &SymMatrix, b: &SymMatrix, p: f64) -> Result<InterpolationChain> {
    check_p(p, 2.0, "p for the full chain")?;
    PsdPair::new(a, b)?.interpolation_chain(p)
}

pub fn chain_left_gap(a: &SymMatrix, b: &SymMatrix, p: f64) -> Result<GapReport> {
    check_p(p, 1.0, "p")?;
    PsdPair::new(a, b)?.chain_left_gap(p)
}

pub fn powers_stormer_gap(a: &SymMatrix, b: &SymMatrix, s: f64) -> Result<GapReport> {
    PsdPair::new(a, b)?.powers_stormer_gap(s)
}

pub fn klein_gap(a: &SymMatrix, b: &SymMatrix, f: &OperatorFunction) -> Result<GapReport> {
    PsdPair::new(a, b)?.klein_gap(f)
}

pub fn monotone_gap(a: &SymMatrix, b: &SymMatrix, f: &OperatorFunction) -> Result<GapReport> {
    require_class(f, FunctionClass::Monotone)?;
    PsdPair::new(a, b)?.monotone_gap(f)
}

pub fn convex_gap(a: &SymMatrix, b: &SymMatrix, f: &OperatorFunction) -> Result<GapReport> {
    require_class(f, FunctionClass::Convex)?;
    PsdPair::new(a, b)?.convex_gap(f)
}

pub fn zee_decomposition(a: &SymMatrix, b: &SymMatrix) -> Result<ZeeDecomposition> {
    PsdPair::new(a, b)?.zee_decomposition()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn projections() -> (SymMatrix, SymMatrix) {
        (
            SymMatrix::diag(&[1.0, 0.0]),
            SymMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
        )
    }

    fn diag_pair() -> (SymMatrix, SymMatrix) {
        (SymMatrix::diag(&[2.0, 0.0]), SymMatrix::diag(&[1.0, 0.0]))
    }

    fn f(sel: &str) -> OperatorFunction {
        sel.parse().unwrap()
    }

    #[test]
    fn scalar_examples() {
        assert!((scalar_power_gap(2.0, 1.0, 3.0).unwrap().gap - 2.0).abs() < 1e-15);
        assert_eq!(scalar_power_gap(1.3, 1.3, 3.0).unwrap().gap, 0.0);
        assert_eq!(scalar_power_gap(1.3, 1.3, 1.5).unwrap().gap, 0.0);
        let g = scalar_power_gap(2.0, 1.0, 1.5).unwrap().gap;
        assert!((g - (1.0 - (SQRT2 - 1.0))).abs() < 1e-15);
        assert!((g - 0.585786).abs() < 1e-6);
        assert!(scalar_power_gap(2.0, 1.0, 0.5).is_err());
        assert!(scalar_power_gap(1.0, 2.0, 3.0).is_err());
        assert_eq!(scalar_power_gap(3.0, 1.0, 2.0).unwrap().verdict, Verdict::Equality);
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(GapReport::new("x", 1.0, 1.0, 0.0).verdict, Verdict::Equality);
        assert_eq!(GapReport::new("x", 10.0, 1.0, -1e-9).verdict, Verdict::Equality);
        assert_eq!(GapReport::new("x", 10.0, 1.0, -1e-7).verdict, Verdict::Violated);
        assert_eq!(GapReport::new("x", 10.0, 1.0, 1e-7).verdict, Verdict::Holds);
        let r = GapReport::new("x", 10.0, 1.0, -1e-7).with_tolerance(1e-6);
        assert_eq!(r.verdict, Verdict::Equality);
    }

    #[test]
    fn ricard_examples() {
        let (a, b) = diag_pair();
        assert!((ricard_gap(&a, &b, 3.0).unwrap().gap - 2.0).abs() < 1e-14);
        assert!((ricard_gap(&a, &b, 1.5).unwrap().gap - (2.0 - SQRT2)).abs() < 1e-14);
        assert_eq!(ricard_gap(&a, &a, 3.0).unwrap().gap, 0.0);
        assert!(ricard_gap(&a, &b, 0.9).is_err());
        assert_eq!(ricard_gap(&a, &b, 2.0).unwrap().verdict, Verdict::Equality);
    }

    #[test]
    fn chain_examples() {
        let (a, b) = projections();
        let c = interpolation_chain(&a, &b, 2.0).unwrap();
        assert!((c.left - SQRT2).abs() < 1e-14);
        assert!((c.middle - 1.0).abs() < 1e-14);
        assert!((c.right - 1.0).abs() < 1e-14);
        let c = interpolation_chain(&a, &a, 2.5).unwrap();
        assert_eq!((c.left, c.middle, c.right), (0.0, 0.0, 0.0));
        let (a, b) = diag_pair();
        let c = interpolation_chain(&a, &b, 3.0).unwrap();
        assert_eq!((c.left, c.middle, c.right), (7.0, 3.0, 1.0));
        assert!(interpolation_chain(&a, &b, 1.5).is_err());
        assert!(chain_left_gap(&a, &b, 1.5).unwrap().gap >= 0.0);
    }

    #[test]
    fn powers_stormer_examples() {
        let (a, b) = projections();
        let g = powers_stormer_gap(&a, &b, 0.5).unwrap();
        assert!((g.gap - (SQRT2 - 1.0)).abs() < 1e-14);
        assert_eq!(powers_stormer_gap(&a, &a, 0.3).unwrap().gap.abs() < 1e-15, true);
        let g = powers_stormer_gap(&SymMatrix::diag(&[1.0, 0.0]), &SymMatrix::diag(&[0.0, 1.0]), 0.5).unwrap();
        assert_eq!((g.lhs, g.rhs, g.gap), (0.0, 0.0, 0.0));
        assert!(powers_stormer_gap(&a, &b, 1.5).is_err());
    }

    #[test]
    fn klein_examples() {
        let a = SymMatrix::diag(&[2.0, 0.0]);
        let b = SymMatrix::diag(&[1.0, 1e-6]);
        assert!((klein_gap(&a, &b, &f("square")).unwrap().gap - 1.0).abs() < 1e-5);
        assert_eq!(klein_gap(&b, &b, &f("square")).unwrap().gap, 0.0);
        let (a, b) = projections();
        assert!((klein_gap(&a, &b, &f("square")).unwrap().gap - 1.0).abs() < 1e-14);
        assert!(klein_gap(&a, &b, &f("power:0.5")).is_err());
    }

    #[test]
    fn monotone_examples() {
        let (a, b) = projections();
        let g = monotone_gap(&a, &b, &f("power:0.5")).unwrap();
        assert!((g.gap - (2f64.powf(0.25) - 1.0)).abs() < 1e-14);
        assert!((g.gap - 0.189207).abs() < 1e-6);
        assert_eq!(monotone_gap(&a, &a, &f("power:0.5")).unwrap().gap, 0.0);
        let (a, b) = diag_pair();
        assert!((monotone_gap(&a, &b, &f("power:0.5")).unwrap().gap - (2.0 - SQRT2)).abs() < 1e-14);
        assert!(monotone_gap(&a, &b, &f("square")).is_err());
    }

    #[test]
    fn convex_examples() {
        let (a, b) = projections();
        let g = convex_gap(&a, &b, &f("square")).unwrap();
        assert!((g.gap - (1.0 - 1.0 / SQRT2)).abs() < 1e-14);
        assert_eq!(convex_gap(&b, &b, &f("square")).unwrap().gap, 0.0);
        let (a, b) = diag_pair();
        assert!((convex_gap(&a, &b, &f("square")).unwrap().gap - 2.0).abs() < 1e-14);
        assert!(convex_gap(&a, &b, &f("log1p")).is_err());
        // f(t) = t is accepted in both classes.
        assert!(convex_gap(&a, &b, &f("power:1")).is_ok());
    }

    #[test]
    fn zee_examples() {
        let (a, b) = diag_pair();
        let pair = PsdPair::new(&a, &b).unwrap();
        let z = pair.zee_decomposition().unwrap();
        assert_eq!(z.c_minus.frobenius_norm(), 0.0);
        assert_eq!(z.z, a);
        let t = z.terms(&pair, &f("power:0.5")).unwrap();
        assert_eq!((t.terms[1], t.terms[3]), (0.0, 0.0));

        let (a, b) = projections();
        let pair = PsdPair::new(&a, &b).unwrap();
        let z = pair.zee_decomposition().unwrap();
        assert!((&z.z - &(&b + &z.c_plus)).frobenius_norm() <= 1e-10);
        let g = f("power:0.5");
        let t = z.terms(&pair, &g).unwrap();
        let total = pair.trace_diff_product(&g).unwrap();
        assert!((t.sum() - total).abs() <= 1e-9 * total.abs().max(1.0));
    }

    #[test]
    fn rejects_non_psd_and_mismatched() {
        let a = SymMatrix::diag(&[1.0, -1.0]);
        assert!(matches!(monotone_gap(&a, &a, &f("power:0.5")), Err(Error::NotPsd { .. })));
        assert!(matches!(
            monotone_gap(&SymMatrix::identity(2), &SymMatrix::identity(3), &f("power:0.5")),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
