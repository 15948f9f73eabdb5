//! Catalog of operator monotone and operator convex functions vanishing at 0.
//!
//! Every entry carries a closed-form scalar rule, its derivative, and an
//! explicit integral representation
//!
//! ```text
//! monotone:  f(t) = βt       + ∫ s·t /(s+t) dμ(s)
//! convex:    f(t) = βt + γt² + ∫ s·t²/(s+t) dμ(s)
//! ```
//!
//! where `μ` is either empty, a point mass, or a power-law density
//! `c·s^e` on an interval. The representation is evaluated by
//! double-exponential quadrature so that it can be checked against the
//! closed form.

mod quadrature;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symla::{pow0, SpectralDecomposition, SymMatrix};

use quadrature::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionClass {
    Monotone,
    Convex,
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionClass::Monotone => f.write_str("monotone"),
            FunctionClass::Convex => f.write_str("convex"),
        }
    }
}

/// Closed-form scalar rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FunctionKind {
    /// `t^p`
    Power { p: f64 },
    /// `log(1 + t)`
    Log1p,
    /// `s·t/(s+t)`
    Atom { s: f64 },
    /// `s·t²/(s+t)`
    ConvexAtom { s: f64 },
}

/// The representing measure `μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Measure {
    Empty,
    PointMass { at: f64, weight: f64 },
    /// `coefficient · s^exponent` on `[lower, upper]`.
    PowerDensity {
        coefficient: f64,
        exponent: f64,
        lower: f64,
        upper: f64,
    },
}

/// Quadrature method for [`eval_via_representation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QuadratureMethod {
    #[default]
    DoubleExponential,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub rel_tol: f64,
    pub max_nodes: usize,
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, max_nodes: usize) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerance must be positive, got {rel_tol}"
            )));
        }
        Ok(QuadratureSpec {
            method: QuadratureMethod::DoubleExponential,
            rel_tol,
            max_nodes,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            method: QuadratureMethod::DoubleExponential,
            rel_tol: 1e-6,
            max_nodes: 20_000,
        }
    }
}

/// A catalog entry.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorFunction {
    name: String,
    class: FunctionClass,
    kind: FunctionKind,
    alpha: f64,
    beta: f64,
    gamma: f64,
    measure: Measure,
}

impl OperatorFunction {
    /// `t^p`, operator monotone for `p ∈ (0, 1]`.
    pub fn monotone_power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "monotone power needs p in (0, 1], got {p}"
            )));
        }
        let (beta, measure) = if p == 1.0 {
            (1.0, Measure::Empty)
        } else {
            (
                0.0,
                Measure::PowerDensity {
                    coefficient: (p * PI).sin() / PI,
                    exponent: p - 2.0,
                    lower: 0.0,
                    upper: f64::INFINITY,
                },
            )
        };
        Ok(OperatorFunction {
            name: format!("power:{p}"),
            class: FunctionClass::Monotone,
            kind: FunctionKind::Power { p },
            alpha: 0.0,
            beta,
            gamma: 0.0,
            measure,
        })
    }

    /// `t^p`, operator convex for `p ∈ [1, 2]`. Interior exponents use
    /// `t^p = t · t^{p−1}` so the density pairs with the `s·t²/(s+t)` kernel.
    pub fn convex_power(p: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "convex power needs p in [1, 2], got {p}"
            )));
        }
        let (beta, gamma, measure) = if p == 1.0 {
            (1.0, 0.0, Measure::Empty)
        } else if p == 2.0 {
            (0.0, 1.0, Measure::Empty)
        } else {
            let q = p - 1.0;
            (
                0.0,
                0.0,
                Measure::PowerDensity {
                    coefficient: (q * PI).sin() / PI,
                    exponent: p - 3.0,
                    lower: 0.0,
                    upper: f64::INFINITY,
                },
            )
        };
        Ok(OperatorFunction {
            name: format!("power:{p}"),
            class: FunctionClass::Convex,
            kind: FunctionKind::Power { p },
            alpha: 0.0,
            beta,
            gamma,
            measure,
        })
    }

    /// `t²`.
    pub fn square() -> Self {
        let mut f = Self::convex_power(2.0).expect("p = 2 is valid");
        f.name = "square".into();
        f
    }

    /// `log(1 + t) = ∫₁^∞ s·t/(s+t) · s⁻² ds`.
    pub fn log1p() -> Self {
        OperatorFunction {
            name: "log1p".into(),
            class: FunctionClass::Monotone,
            kind: FunctionKind::Log1p,
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            measure: Measure::PowerDensity {
                coefficient: 1.0,
                exponent: -2.0,
                lower: 1.0,
                upper: f64::INFINITY,
            },
        }
    }

    /// `s·t/(s+t)`: a unit point mass at `s`.
    pub fn atom(s: f64) -> Result<Self> {
        check_atom(s)?;
        Ok(OperatorFunction {
            name: format!("atom:{s}"),
            class: FunctionClass::Monotone,
            kind: FunctionKind::Atom { s },
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            measure: Measure::PointMass { at: s, weight: 1.0 },
        })
    }

    /// `s·t²/(s+t)`: a unit point mass against the convex kernel.
    pub fn convex_atom(s: f64) -> Result<Self> {
        check_atom(s)?;
        Ok(OperatorFunction {
            name: format!("catom:{s}"),
            class: FunctionClass::Convex,
            kind: FunctionKind::ConvexAtom { s },
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            measure: Measure::PointMass { at: s, weight: 1.0 },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class(&self) -> FunctionClass {
        self.class
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn has_measure(&self) -> bool {
        self.measure != Measure::Empty
    }

    /// The same scalar rule viewed in `class`, when it belongs to both
    /// classes (only `f(t) = t` does).
    pub fn in_class(&self, class: FunctionClass) -> Option<OperatorFunction> {
        if self.class == class {
            return Some(self.clone());
        }
        match self.kind {
            FunctionKind::Power { p } if p == 1.0 => match class {
                FunctionClass::Monotone => Self::monotone_power(1.0).ok(),
                FunctionClass::Convex => Self::convex_power(1.0).ok(),
            },
            _ => None,
        }
    }

    /// Closed form without the domain check.
    pub(crate) fn value(&self, t: f64) -> f64 {
        match self.kind {
            FunctionKind::Power { p } => pow0(t, p),
            FunctionKind::Log1p => t.ln_1p(),
            FunctionKind::Atom { s } => s * t / (s + t),
            FunctionKind::ConvexAtom { s } => s * t * t / (s + t),
        }
    }

    /// Whether `f′` extends continuously to `t = 0`.
    pub fn derivative_extends_to_zero(&self) -> bool {
        match self.kind {
            FunctionKind::Power { p } => p >= 1.0,
            _ => true,
        }
    }

    pub(crate) fn derivative(&self, t: f64) -> f64 {
        match self.kind {
            FunctionKind::Power { p } => {
                if t == 0.0 {
                    if p > 1.0 {
                        0.0
                    } else if p == 1.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    p * t.powf(p - 1.0)
                }
            }
            FunctionKind::Log1p => 1.0 / (1.0 + t),
            FunctionKind::Atom { s } => s * s / ((s + t) * (s + t)),
            FunctionKind::ConvexAtom { s } => s * t * (t + 2.0 * s) / ((s + t) * (s + t)),
        }
    }

    /// `f(M)` from a PSD spectral decomposition.
    pub fn apply(&self, d: &SpectralDecomposition) -> Result<SymMatrix> {
        d.map(&self.name, |t| if t < 0.0 { f64::NAN } else { self.value(t) })
    }

    /// `f′(M)` from a spectral decomposition.
    pub fn apply_derivative(&self, d: &SpectralDecomposition) -> Result<SymMatrix> {
        let name = format!("{}'", self.name);
        d.map(&name, |t| if t < 0.0 { f64::NAN } else { self.derivative(t) })
    }

    fn kernel_ln(&self, ln_s: f64, ln_t: f64) -> f64 {
        let t_power = match self.class {
            FunctionClass::Monotone => 1.0,
            FunctionClass::Convex => 2.0,
        };
        ln_s + t_power * ln_t - log_add_exp(ln_s, ln_t)
    }

    fn kernel(&self, s: f64, t: f64) -> f64 {
        match self.class {
            FunctionClass::Monotone => s * t / (s + t),
            FunctionClass::Convex => s * t * t / (s + t),
        }
    }
}

fn check_atom(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "atom location must be positive and finite, got {s}"
        )));
    }
    Ok(())
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

impl fmt::Display for OperatorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Parses the `name[:param]` grammar: `power:<p>`, `log1p`, `square`,
/// `atom:<s>`, `catom:<s>`. `power:1` resolves to the monotone entry; use
/// [`OperatorFunction::in_class`] to view it as convex.
impl FromStr for OperatorFunction {
    type Err = Error;
    fn from_str(sel: &str) -> Result<Self> {
        let (name, param) = match sel.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (sel, None),
        };
        let number = |what: &str| -> Result<f64> {
            let raw = param.ok_or_else(|| Error::Parse(format!("`{what}` needs a parameter")))?;
            raw.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad parameter `{raw}` for `{what}`: {e}")))
        };
        match name {
            "power" => {
                let p = number("power")?;
                if p <= 1.0 {
                    Self::monotone_power(p)
                } else {
                    Self::convex_power(p)
                }
            }
            "atom" => Self::atom(number("atom")?),
            "catom" => Self::convex_atom(number("catom")?),
            "log1p" | "square" if param.is_some() => {
                Err(Error::Parse(format!("`{name}` takes no parameter")))
            }
            "log1p" => Ok(Self::log1p()),
            "square" => Ok(Self::square()),
            _ => Err(Error::Parse(format!("unknown function `{sel}`"))),
        }
    }
}

/// The shipped catalog: monotone powers on a 0.1 grid, `log1p` and two atoms;
/// convex powers on a 0.1 grid, `square` and two convex atoms.
pub fn catalog() -> Vec<OperatorFunction> {
    let mut out: Vec<OperatorFunction> = (1..=10)
        .map(|k| OperatorFunction::monotone_power(k as f64 / 10.0).unwrap())
        .collect();
    out.push(OperatorFunction::log1p());
    out.push(OperatorFunction::atom(0.5).unwrap());
    out.push(OperatorFunction::atom(2.5).unwrap());
    out.extend((10..=20).map(|k| OperatorFunction::convex_power(k as f64 / 10.0).unwrap()));
    out.push(OperatorFunction::square());
    out.push(OperatorFunction::convex_atom(0.5).unwrap());
    out.push(OperatorFunction::convex_atom(2.5).unwrap());
    out
}

/// Closed-form value; `t < 0` is rejected.
pub fn eval_scalar(f: &OperatorFunction, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            function: f.name.clone(),
            at: t,
        });
    }
    Ok(f.value(t))
}

/// Closed-form derivative at `t > 0`, or at `t = 0` when it extends there.
pub fn eval_derivative(f: &OperatorFunction, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() || (t == 0.0 && !f.derivative_extends_to_zero()) {
        return Err(Error::Domain {
            function: format!("{}'", f.name),
            at: t,
        });
    }
    Ok(f.derivative(t))
}

/// `α + βt (+ γt²) + ∫ kernel(s, t) dμ(s)` with the integral done by
/// quadrature on `log s`, split at `s = t`.
pub fn eval_via_representation(f: &OperatorFunction, t: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            function: f.name.clone(),
            at: t,
        });
    }
    let polynomial = f.alpha + f.beta * t + f.gamma * t * t;
    let integral = match f.measure {
        Measure::Empty => 0.0,
        Measure::PointMass { at, weight } => weight * f.kernel(at, t),
        Measure::PowerDensity { .. } if t == 0.0 => 0.0,
        Measure::PowerDensity {
            coefficient,
            exponent,
            lower,
            upper,
        } => {
            let ln_t = t.ln();
            let ln_c = coefficient.ln();
            // ds = s dv with v = ln s
            let integrand = |v: f64| (ln_c + (exponent + 1.0) * v + f.kernel_ln(v, ln_t)).exp();
            let lo = lower.ln();
            let hi = upper.ln();
            let split = ln_t.clamp(lo, hi);
            let mut total = 0.0;
            let mut nodes = 0;
            for iv in [Interval { lo, hi: split }, Interval { lo: split, hi }] {
                let out = quadrature::integrate(&integrand, iv, q.rel_tol, q.max_nodes.saturating_sub(nodes))?;
                total += out.value;
                nodes += out.nodes;
            }
            total
        }
    };
    Ok(polynomial + integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn sqrt_entry_shape() {
        let f: OperatorFunction = "power:0.5".parse().unwrap();
        assert_eq!(f.class(), FunctionClass::Monotone);
        assert_eq!(f.beta(), 0.0);
        assert!(matches!(f.measure(), Measure::PowerDensity { coefficient, .. } if (coefficient - 1.0 / PI).abs() < 1e-15));
    }

    #[test]
    fn linear_and_square_entries() {
        let f: OperatorFunction = "power:1".parse().unwrap();
        assert_eq!((f.class(), f.beta(), f.measure()), (FunctionClass::Monotone, 1.0, Measure::Empty));
        let g = f.in_class(FunctionClass::Convex).unwrap();
        assert_eq!((g.beta(), g.gamma()), (1.0, 0.0));
        let sq: OperatorFunction = "square".parse().unwrap();
        assert_eq!((sq.class(), sq.gamma(), sq.beta(), sq.measure()), (FunctionClass::Convex, 1.0, 0.0, Measure::Empty));
        assert!(OperatorFunction::log1p().in_class(FunctionClass::Convex).is_none());
    }

    #[test]
    fn selector_errors() {
        for bad in ["power", "power:x", "power:0", "power:2.5", "atom:-1", "log1p:2", "cosh"] {
            assert!(bad.parse::<OperatorFunction>().is_err(), "{bad}");
        }
    }

    #[test]
    fn scalar_values() {
        let sqrt: OperatorFunction = "power:0.5".parse().unwrap();
        assert_eq!(eval_scalar(&sqrt, 4.0).unwrap(), 2.0);
        for f in catalog() {
            assert_eq!(eval_scalar(&f, 0.0).unwrap(), 0.0, "{}", f.name());
        }
        let l = OperatorFunction::log1p();
        assert!((eval_scalar(&l, std::f64::consts::E - 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(eval_scalar(&l, -1.0).is_err());
    }

    #[test]
    fn derivatives() {
        assert_eq!(eval_derivative(&OperatorFunction::square(), 3.0).unwrap(), 6.0);
        for p in [0.3, 1.0, 1.7] {
            let f: OperatorFunction = format!("power:{p}").parse().unwrap();
            assert!((eval_derivative(&f, 1.0).unwrap() - p).abs() < 1e-15);
        }
        assert_eq!(eval_derivative(&OperatorFunction::log1p(), 0.0).unwrap(), 1.0);
        assert!(eval_derivative(&"power:0.5".parse().unwrap(), 0.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for f in catalog() {
            for t in [0.3, 1.0, 4.0] {
                let h = 1e-6;
                let fd = (f.value(t + h) - f.value(t - h)) / (2.0 * h);
                assert!(rel_err(eval_derivative(&f, t).unwrap(), fd) < 1e-7, "{} at {t}", f.name());
            }
        }
    }

    #[test]
    fn representation_examples() {
        let q = QuadratureSpec::default();
        let sqrt: OperatorFunction = "power:0.5".parse().unwrap();
        assert!(rel_err(eval_via_representation(&sqrt, 4.0, &q).unwrap(), 2.0) < 1e-6);
        let atom = OperatorFunction::atom(1.0).unwrap();
        assert_eq!(eval_via_representation(&atom, 1.0, &q).unwrap(), 0.5);
        let p15: OperatorFunction = "power:1.5".parse().unwrap();
        let v = eval_via_representation(&p15, 2.0, &q).unwrap();
        assert!(rel_err(v, 2f64.powf(1.5)) < 1e-6);
        assert!((v - 2.828427).abs() < 1e-6);
    }

    #[test]
    fn representation_matches_closed_form_on_grid() {
        let q = QuadratureSpec::default();
        for f in catalog().iter().filter(|f| f.has_measure()) {
            for i in 0..50 {
                let t = 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0);
                let via = eval_via_representation(f, t, &q).unwrap();
                let exact = eval_scalar(f, t).unwrap();
                assert!((via - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{} at {t}: {via} vs {exact}", f.name());
            }
        }
    }

    #[test]
    fn monotone_entries_are_nondecreasing_and_convex_entries_midpoint_convex() {
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        for f in catalog() {
            let vals: Vec<f64> = grid.iter().map(|&t| f.value(t)).collect();
            assert!(vals.iter().all(|&v| v >= 0.0));
            match f.class() {
                FunctionClass::Monotone => {
                    assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{}", f.name());
                }
                FunctionClass::Convex => {
                    for w in grid.windows(3) {
                        let (a, b) = (w[0], w[2]);
                        let mid = f.value(0.5 * (a + b));
                        assert!(mid <= 0.5 * (f.value(a) + f.value(b)) + 1e-12, "{}", f.name());
                    }
                }
            }
        }
    }

    #[test]
    fn quadrature_spec_validation() {
        assert!(QuadratureSpec::new(0.0, 100).is_err());
        assert!(QuadratureSpec::new(1e-8, 100).is_ok());
    }
}
