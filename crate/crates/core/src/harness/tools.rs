//! Single-instance evaluation and the representation cross-check, as used by
//! the `eval` and `quadcheck` commands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcat::{eval_scalar, eval_via_representation, OperatorFunction, QuadratureSpec};
use crate::ineq::{GapReport, PsdPair};
use crate::symla::SymMatrix;
use crate::uinorm::{holder_gap, NormSpec};

/// Optional parameters for [`evaluate_named`]. Each inequality reads only
/// the ones it needs.
#[derive(Clone, Debug, Default)]
pub struct EvalParams {
    pub function: Option<OperatorFunction>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub s: Option<f64>,
    pub theta: Option<f64>,
    pub norm: Option<NormSpec>,
}

pub const INEQUALITIES: [&str; 12] = [
    "monotone",
    "convex",
    "klein",
    "ricard",
    "chain",
    "chain_left",
    "powers_stormer",
    "ando",
    "ando_theta",
    "holder",
    "conjecture",
    "zee",
];

fn need<T: Copy>(v: Option<T>, what: &str, ineq: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("`{ineq}` needs {what}")))
}

/// Evaluates inequality `ineq` on `(A, B)`.
///
/// `holder` reads `A` and `B` as the two arbitrary symmetric factors; every
/// other inequality requires both to be PSD. `chain` returns both halves,
/// `conjecture` without `norm` returns one report per Ky Fan index, and
/// `zee` returns the four cross terms as reports against zero.
pub fn evaluate_named(ineq: &str, a: &SymMatrix, b: &SymMatrix, prm: &EvalParams) -> Result<Vec<GapReport>> {
    if ineq == "holder" {
        let p = need(prm.p, "--p", ineq)?;
        let q = need(prm.q, "--q", ineq)?;
        return Ok(vec![holder_gap(a, b, p, q)?]);
    }
    let pair = PsdPair::new(a, b)?;
    let f = || prm.function.clone().ok_or_else(|| Error::InvalidParameter(format!("`{ineq}` needs --function")));
    Ok(match ineq {
        "monotone" => vec![pair.monotone_gap(&f()?)?],
        "convex" => vec![pair.convex_gap(&f()?)?],
        "klein" => vec![pair.klein_gap(&f()?)?],
        "ricard" => vec![pair.ricard_gap(need(prm.p, "--p", ineq)?)?],
        "chain" => {
            let c = pair.interpolation_chain(need(prm.p, "--p", ineq)?)?;
            vec![c.left_gap, c.right_gap]
        }
        "chain_left" => vec![pair.chain_left_gap(need(prm.p, "--p", ineq)?)?],
        "powers_stormer" => vec![pair.powers_stormer_gap(need(prm.s, "--s", ineq)?)?],
        "ando" => vec![pair.ando_gap(need(prm.p, "--p", ineq)?, prm.norm.unwrap_or(NormSpec::trace()))?],
        "ando_theta" => vec![pair.ando_theta_gap(need(prm.theta, "--theta", ineq)?, need(prm.q, "--q", ineq)?)?],
        "conjecture" => match prm.norm {
            Some(n) => vec![pair.conjecture_gap(&f()?, n)?],
            None => pair.conjecture_gaps_all_k(&f()?)?,
        },
        "zee" => {
            let f = f()?;
            let t = pair.zee_decomposition()?.terms(&pair, &f)?.terms;
            t.iter()
                .enumerate()
                .map(|(i, &v)| GapReport::new(format!("cross_term_{}", i + 1), v, 0.0, v))
                .collect()
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown inequality `{other}` (expected one of {})",
                INEQUALITIES.join(", ")
            )))
        }
    })
}

/// One point of the representation cross-check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadPoint {
    pub t: f64,
    pub closed_form: f64,
    pub representation: f64,
    pub relative_error: f64,
}

/// `points` log-spaced values in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (l, h) = (lo.ln(), hi.ln());
            (0..points)
                .map(|i| (l + (h - l) * i as f64 / (points - 1) as f64).exp())
                .collect()
        }
    }
}

/// Compares the closed form of `f` with its integral representation on a
/// log-spaced grid.
pub fn quadrature_check(f: &OperatorFunction, lo: f64, hi: f64, points: usize, q: &QuadratureSpec) -> Result<Vec<QuadPoint>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
    }
    log_grid(lo, hi, points)
        .into_iter()
        .map(|t| {
            let closed_form = eval_scalar(f, t)?;
            let representation = eval_via_representation(f, t, q)?;
            Ok(QuadPoint {
                t,
                closed_form,
                representation,
                relative_error: (representation - closed_form).abs() / closed_form.abs().max(f64::MIN_POSITIVE),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 7);
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1e-3).abs() < 1e-15);
        assert!((g[3] - 1.0).abs() < 1e-12);
        assert!((g[6] - 1e3).abs() < 1e-9);
    }

    #[test]
    fn named_dispatch() {
        let a = SymMatrix::diag(&[2.0, 1.0]);
        let b = SymMatrix::diag(&[1.0, 1.0]);
        let prm = EvalParams {
            function: Some("power:0.5".parse().unwrap()),
            p: Some(3.0),
            ..EvalParams::default()
        };
        assert_eq!(evaluate_named("monotone", &a, &b, &prm).unwrap().len(), 1);
        assert_eq!(evaluate_named("chain", &a, &b, &prm).unwrap().len(), 2);
        assert_eq!(evaluate_named("conjecture", &a, &b, &prm).unwrap().len(), 2);
        assert!(evaluate_named("powers_stormer", &a, &b, &prm).is_err());
        assert!(evaluate_named("nope", &a, &b, &prm).is_err());
    }

    #[test]
    fn quadcheck_on_power() {
        let f: OperatorFunction = "power:1.7".parse().unwrap();
        let pts = quadrature_check(&f, 1e-3, 1e3, 50, &QuadratureSpec::default()).unwrap();
        assert_eq!(pts.len(), 50);
        assert!(pts.iter().all(|p| p.relative_error <= 1e-6));
    }
}
