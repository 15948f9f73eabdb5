//! Scalar-sum oracle for commuting pairs.
//!
//! When `A` and `B` share an eigenbasis every trace quantity collapses to a
//! sum over paired eigenvalues `(aᵢ, bᵢ)`. The sums below never touch the
//! eigensolver, so they independently check the matrix route.

use crate::error::Result;
use crate::funcat::{FunctionClass, OperatorFunction};
use crate::ineq::PsdPair;
use crate::sampler::CommutingPair;
use crate::symla::pow0;

/// `p` values exercised by the oracle for power-type traces.
pub const ORACLE_POWERS: [f64; 6] = [1.2, 1.5, 2.0, 2.5, 3.0, 4.0];
/// `s` values exercised for the mixed product `Tr(A^s B^{1−s})`.
pub const ORACLE_MIXING: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// One compared quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleComparison {
    pub quantity: String,
    pub library: f64,
    pub oracle: f64,
}

impl OracleComparison {
    /// `|library − oracle| / max(1, |oracle|)`.
    pub fn deviation(&self) -> f64 {
        (self.library - self.oracle).abs() / self.oracle.abs().max(1.0)
    }
}

fn push(out: &mut Vec<OracleComparison>, quantity: String, library: f64, oracle: f64) {
    out.push(OracleComparison {
        quantity,
        library,
        oracle,
    });
}

/// Compares every trace quantity of the pair against its scalar sum.
pub fn compare(pair: &CommutingPair, functions: &[OperatorFunction]) -> Result<Vec<OracleComparison>> {
    let lib = PsdPair::new(&pair.a, &pair.b)?;
    let ab: Vec<(f64, f64)> = pair
        .a_eigenvalues
        .iter()
        .copied()
        .zip(pair.b_eigenvalues.iter().copied())
        .collect();
    let sum = |g: &dyn Fn(f64, f64) -> f64| ab.iter().map(|&(a, b)| g(a, b)).sum::<f64>();
    let mut out = Vec::new();

    for f in functions {
        let v = |t: f64| f.value(t);
        push(
            &mut out,
            format!("Tr((A-B)(f(A)-f(B))) {}", f.name()),
            lib.trace_diff_product(f)?,
            sum(&|a, b| (a - b) * (v(a) - v(b))),
        );
        push(
            &mut out,
            format!("Tr(|A-B| f(|A-B|)) {}", f.name()),
            lib.trace_abs_diff_weighted(f),
            sum(&|a, b| (a - b).abs() * v((a - b).abs())),
        );
        let gaps = lib.conjecture_gaps_all_k(f)?;
        let mut prod: Vec<f64> = ab.iter().map(|&(a, b)| ((a - b) * (v(a) - v(b))).abs()).collect();
        prod.sort_by(|x, y| y.total_cmp(x));
        for (k, g) in gaps.iter().enumerate() {
            push(
                &mut out,
                format!("kyfan:{} of (A-B)(f(A)-f(B)) {}", k + 1, f.name()),
                g.lhs,
                prod[..=k].iter().sum(),
            );
        }
        if f.class() == FunctionClass::Convex {
            let lhs = f.apply(lib.spectrum_a())?.trace() - f.apply(lib.spectrum_b())?.trace();
            push(&mut out, format!("Tr(f(A)-f(B)) {}", f.name()), lhs, sum(&|a, b| v(a) - v(b)));
        }
    }

    for p in ORACLE_POWERS {
        push(
            &mut out,
            format!("Tr((A-B)(A^(p-1)-B^(p-1))) p={p}"),
            lib.ricard_middle(p)?,
            sum(&|a, b| (a - b) * (pow0(a, p - 1.0) - pow0(b, p - 1.0))),
        );
        push(
            &mut out,
            format!("Tr(|A-B|^p) p={p}"),
            lib.trace_abs_diff_power(p),
            sum(&|a, b| pow0((a - b).abs(), p)),
        );
        push(
            &mut out,
            format!("Tr|A^p-B^p| p={p}"),
            lib.trace_abs_power_diff(p)?,
            sum(&|a, b| (pow0(a, p) - pow0(b, p)).abs()),
        );
    }

    for s in ORACLE_MIXING {
        let g = lib.powers_stormer_gap(s)?;
        push(&mut out, format!("2Tr(A^s B^(1-s)) s={s}"), g.rhs, 2.0 * sum(&|a, b| pow0(a, s) * pow0(b, 1.0 - s)));
        push(&mut out, format!("Tr(A+B-|A-B|) s={s}"), g.lhs, sum(&|a, b| a + b - (a - b).abs()));
    }
    Ok(out)
}

/// Largest deviation across [`compare`].
pub fn max_deviation(pair: &CommutingPair, functions: &[OperatorFunction]) -> Result<f64> {
    Ok(compare(pair, functions)?
        .iter()
        .map(OracleComparison::deviation)
        .fold(0.0, f64::max))
}
