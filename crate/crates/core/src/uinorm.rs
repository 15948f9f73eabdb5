//! Unitarily invariant norms (Schatten and Ky Fan) and the norm-form gaps:
//! Ando's inequality, its θ-form, Hölder's inequality, and the conjectured
//! norm version of the monotone/convex trace inequalities.
//!
//! Fan dominance reduces a comparison over every unitarily invariant norm to
//! the Ky Fan family `k = 1..n`, so [`conjecture_gaps_all_k`] is the search
//! target.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcat::{FunctionClass, OperatorFunction};
use crate::ineq::{GapReport, PsdPair};
use crate::symla::{
    jacobi_eigh_with_tol, pow0, singular_values_with_tol, symmetric_singular_values, SquareMatrix, SymMatrix,
};

/// A member of the Schatten or Ky Fan family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "index", rename_all = "lowercase")]
pub enum NormSpec {
    /// `(Σ σᵢ^p)^{1/p}`, `p ≥ 1`; `p = ∞` is the operator norm.
    Schatten(f64),
    /// Sum of the `k` largest singular values.
    KyFan(usize),
}

impl NormSpec {
    pub fn trace() -> Self {
        NormSpec::Schatten(1.0)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            NormSpec::Schatten(p) if !(p >= 1.0) => Err(Error::InvalidParameter(format!(
                "Schatten index must be >= 1, got {p}"
            ))),
            NormSpec::KyFan(k) if k == 0 || k > dim => Err(Error::InvalidParameter(format!(
                "Ky Fan index must lie in [1, {dim}], got {k}"
            ))),
            _ => Ok(()),
        }
    }

    /// Evaluates the norm from singular values sorted descending.
    pub fn apply(&self, singular_values: &[f64]) -> Result<f64> {
        self.validate(singular_values.len())?;
        Ok(match *self {
            NormSpec::Schatten(p) => schatten_from_singular(singular_values, p),
            NormSpec::KyFan(k) => singular_values[..k].iter().sum(),
        })
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Schatten(p) if *p == 1.0 => f.write_str("trace"),
            NormSpec::Schatten(p) => write!(f, "schatten:{p}"),
            NormSpec::KyFan(k) => write!(f, "kyfan:{k}"),
        }
    }
}

/// `kyfan:<k>` | `schatten:<p>` | `trace`.
impl FromStr for NormSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = |e: &dyn fmt::Display| Error::Parse(format!("bad norm `{s}`: {e}"));
        match s.split_once(':') {
            None if s == "trace" => Ok(NormSpec::trace()),
            Some(("kyfan", k)) => {
                let k: usize = k.parse().map_err(|e| bad(&e))?;
                if k == 0 {
                    return Err(bad(&"k must be positive"));
                }
                Ok(NormSpec::KyFan(k))
            }
            Some(("schatten", p)) => {
                let p: f64 = if p == "inf" { f64::INFINITY } else { p.parse().map_err(|e| bad(&e))? };
                if !(p >= 1.0) {
                    return Err(bad(&"p must be >= 1"));
                }
                Ok(NormSpec::Schatten(p))
            }
            _ => Err(bad(&"expected kyfan:<k>, schatten:<p> or trace")),
        }
    }
}

fn schatten_from_singular(sv: &[f64], p: f64) -> f64 {
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return max;
    }
    if p == 1.0 {
        return sv.iter().sum();
    }
    max * sv.iter().map(|s| (s / max).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Anything with singular values.
pub trait SingularValues {
    fn singular_values(&self) -> Result<Vec<f64>>;
}

impl SingularValues for SymMatrix {
    fn singular_values(&self) -> Result<Vec<f64>> {
        symmetric_singular_values(self)
    }
}

impl SingularValues for SquareMatrix {
    fn singular_values(&self) -> Result<Vec<f64>> {
        crate::symla::singular_values(self)
    }
}

pub fn schatten_norm<M: SingularValues + ?Sized>(m: &M, p: f64) -> Result<f64> {
    NormSpec::Schatten(p).validate(1)?;
    Ok(schatten_from_singular(&m.singular_values()?, p))
}

pub fn ky_fan_norm<M: SingularValues + ?Sized>(m: &M, k: usize) -> Result<f64> {
    NormSpec::KyFan(k).apply(&m.singular_values()?)
}

pub fn norm<M: SingularValues + ?Sized>(m: &M, spec: NormSpec) -> Result<f64> {
    spec.apply(&m.singular_values()?)
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

impl PsdPair {
    /// `|||A^p − B^p||| − ||| |A−B|^p |||`.
    pub fn ando_gap(&self, p: f64, spec: NormSpec) -> Result<GapReport> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
        }
        spec.validate(self.dim())?;
        let diff_p = &self.spectrum_a().map("power", |t| pow0(t, p))? - &self.spectrum_b().map("power", |t| pow0(t, p))?;
        let sv = abs_eigenvalues(&diff_p, self.tolerance())?;
        let lhs = spec.apply(&sv)?;
        let rhs = spec.apply(&sorted_desc(self.abs_diff_eigenvalues().iter().map(|&c| pow0(c, p)).collect()))?;
        Ok(GapReport::new("ando", lhs, rhs, lhs - rhs))
    }

    /// `‖A−B‖_q^θ − ‖A^θ − B^θ‖_{q/θ}`.
    pub fn ando_theta_gap(&self, theta: f64, q: f64) -> Result<GapReport> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidParameter(format!("theta must lie in (0, 1], got {theta}")));
        }
        if !(q >= theta && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("q must be >= theta, got {q}")));
        }
        let diff_theta =
            &self.spectrum_a().map("power", |t| pow0(t, theta))? - &self.spectrum_b().map("power", |t| pow0(t, theta))?;
        let lhs = schatten_from_singular(&abs_eigenvalues(&diff_theta, self.tolerance())?, q / theta);
        let rhs = schatten_quasi(&self.abs_diff_eigenvalues(), q).powf(theta);
        Ok(GapReport::new("ando_theta", lhs, rhs, rhs - lhs))
    }

    /// `(A−B)(f(A) − f(B))`, generally nonsymmetric.
    pub fn conjecture_product(&self, f: &OperatorFunction) -> Result<SquareMatrix> {
        let d = &f.apply(self.spectrum_a())? - &f.apply(self.spectrum_b())?;
        Ok(self.diff().matmul(&d))
    }

    /// Gap of the conjectured norm inequality for every Ky Fan index
    /// `k = 1..n`, sharing one singular value computation.
    pub fn conjecture_gaps_all_k(&self, f: &OperatorFunction) -> Result<Vec<GapReport>> {
        let (sv_prod, sv_abs) = self.conjecture_singular_values(f)?;
        (1..=self.dim())
            .map(|k| conjecture_report(f, NormSpec::KyFan(k), &sv_prod, &sv_abs))
            .collect()
    }

    pub fn conjecture_gap(&self, f: &OperatorFunction, spec: NormSpec) -> Result<GapReport> {
        spec.validate(self.dim())?;
        let (sv_prod, sv_abs) = self.conjecture_singular_values(f)?;
        conjecture_report(f, spec, &sv_prod, &sv_abs)
    }

    fn conjecture_singular_values(&self, f: &OperatorFunction) -> Result<(Vec<f64>, Vec<f64>)> {
        let prod = self.conjecture_product(f)?;
        let sv_prod = singular_values_with_tol(&prod, self.tolerance())?;
        // |A−B| f(|A−B|) is PSD with eigenvalues |c| f(|c|).
        let sv_abs = sorted_desc(self.abs_diff_eigenvalues().iter().map(|&c| c * f.value(c)).collect());
        Ok((sv_prod, sv_abs))
    }
}

fn conjecture_report(f: &OperatorFunction, spec: NormSpec, sv_prod: &[f64], sv_abs: &[f64]) -> Result<GapReport> {
    let lhs = spec.apply(sv_prod)?;
    let rhs = spec.apply(sv_abs)?;
    let gap = match f.class() {
        FunctionClass::Monotone => rhs - lhs,
        FunctionClass::Convex => lhs - rhs,
    };
    Ok(GapReport::new(format!("conjecture[{spec}]"), lhs, rhs, gap))
}

/// `(Σ|x|^q)^{1/q}` for any `q > 0`.
fn schatten_quasi(values: &[f64], q: f64) -> f64 {
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    max * values.iter().map(|s| (s / max).powf(q)).sum::<f64>().powf(1.0 / q)
}

fn abs_eigenvalues(m: &SymMatrix, tol: f64) -> Result<Vec<f64>> {
    let d = jacobi_eigh_with_tol(m, tol)?;
    Ok(sorted_desc(d.eigenvalues().iter().map(|x| x.abs()).collect()))
}

pub fn ando_gap(a: &SymMatrix, b: &SymMatrix, p: f64, spec: NormSpec) -> Result<GapReport> {
    PsdPair::new(a, b)?.ando_gap(p, spec)
}

pub fn ando_theta_gap(a: &SymMatrix, b: &SymMatrix, theta: f64, q: f64) -> Result<GapReport> {
    PsdPair::new(a, b)?.ando_theta_gap(theta, q)
}

pub fn conjecture_gap(a: &SymMatrix, b: &SymMatrix, f: &OperatorFunction, spec: NormSpec) -> Result<GapReport> {
    PsdPair::new(a, b)?.conjecture_gap(f, spec)
}

/// Hölder: `‖X‖_p ‖Y‖_q − |Tr(XY)|` for conjugate exponents.
pub fn holder_gap(x: &SymMatrix, y: &SymMatrix, p: f64, q: f64) -> Result<GapReport> {
    if !(p >= 1.0 && q >= 1.0) || (1.0 / p + 1.0 / q - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("({p}, {q}) are not conjugate exponents")));
    }
    let lhs = crate::symla::trace_product(x, y)?.abs();
    let rhs = schatten_norm(x, p)? * schatten_norm(y, q)?;
    Ok(GapReport::new("holder", lhs, rhs, rhs - lhs))
}
