//! Named checks and the per-instance evaluation behind each.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcat::{FunctionClass, OperatorFunction};
use crate::ineq::{GapReport, PsdPair};
use crate::symla::resolvent_residual;
use crate::uinorm::{holder_gap, NormSpec};

pub const RICARD_POWERS: [f64; 6] = [1.2, 1.5, 2.0, 2.5, 3.0, 4.0];
pub const CHAIN_POWERS: [f64; 4] = [2.0, 2.5, 3.0, 4.0];
pub const CHAIN_LEFT_POWERS: [f64; 2] = [1.2, 1.5];
pub const STORMER_MIXING: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
pub const ANDO_POWERS: [f64; 3] = [1.5, 2.0, 3.0];
pub const ANDO_THETAS: [f64; 3] = [0.25, 0.5, 0.75];
pub const ANDO_QS: [f64; 3] = [1.0, 2.0, 3.0];
pub const HOLDER_PAIRS: [(f64, f64); 3] = [(2.0, 2.0), (3.0, 1.5), (4.0, 4.0 / 3.0)];
pub const RESOLVENT_SHIFTS: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];

/// Every check the suite runner knows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Monotone,
    Convex,
    Ricard,
    Chain,
    ChainLeft,
    PowersStormer,
    Klein,
    AndoTrace,
    AndoKyfan,
    AndoTheta,
    Holder,
    Resolvent,
    ZeeIdentity,
    CrossTerms,
    OrderedReduction,
    CommutingOracle,
    Conjecture,
}

impl Check {
    pub const ALL: [Check; 17] = [
        Check::Monotone,
        Check::Convex,
        Check::Ricard,
        Check::Chain,
        Check::ChainLeft,
        Check::PowersStormer,
        Check::Klein,
        Check::AndoTrace,
        Check::AndoKyfan,
        Check::AndoTheta,
        Check::Holder,
        Check::Resolvent,
        Check::ZeeIdentity,
        Check::CrossTerms,
        Check::OrderedReduction,
        Check::CommutingOracle,
        Check::Conjecture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Monotone => "monotone",
            Check::Convex => "convex",
            Check::Ricard => "ricard",
            Check::Chain => "chain",
            Check::ChainLeft => "chain_left",
            Check::PowersStormer => "powers_stormer",
            Check::Klein => "klein",
            Check::AndoTrace => "ando_trace",
            Check::AndoKyfan => "ando_kyfan",
            Check::AndoTheta => "ando_theta",
            Check::Holder => "holder",
            Check::Resolvent => "resolvent",
            Check::ZeeIdentity => "zee_identity",
            Check::CrossTerms => "cross_terms",
            Check::OrderedReduction => "ordered_reduction",
            Check::CommutingOracle => "commuting_oracle",
            Check::Conjecture => "conjecture",
        }
    }

    /// Checks selected by `all`. The conjecture is evidence, not a theorem,
    /// so it only runs when asked for by name.
    pub fn theorem_checks() -> Vec<Check> {
        Check::ALL.iter().copied().filter(|c| *c != Check::Conjecture).collect()
    }

    /// Expands a comma-free list of selectors (`all` or check names).
    pub fn resolve(selectors: &[String]) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for s in selectors {
            let picked = if s == "all" { Check::theorem_checks() } else { vec![s.parse()?] };
            for c in picked {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    /// Whether the check needs the function list.
    pub fn uses_functions(self) -> bool {
        matches!(
            self,
            Check::Monotone
                | Check::Convex
                | Check::Klein
                | Check::ZeeIdentity
                | Check::CrossTerms
                | Check::OrderedReduction
                | Check::CommutingOracle
                | Check::Conjecture
        )
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown check `{s}`")))
    }
}

/// Which sampled pair a check runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Source {
    Configured,
    Ordered,
    Commuting,
}

/// A single check instantiated with its parameters.
#[derive(Clone, Debug)]
pub(crate) struct Variant {
    pub check: Check,
    /// Function or parameter label reported in the `function` column.
    pub label: String,
    pub param: Param,
}

#[derive(Clone, Debug)]
pub(crate) enum Param {
    Function(OperatorFunction),
    Functions(Vec<OperatorFunction>),
    Power(f64),
    Mixing(f64),
    Theta(f64, f64),
    Holder(f64, f64),
    Shift(f64),
}

/// Outcome of one check on one instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Outcome {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub relative_gap: f64,
}

impl From<&GapReport> for Outcome {
    fn from(r: &GapReport) -> Self {
        Outcome {
            lhs: r.lhs,
            rhs: r.rhs,
            gap: r.gap,
            relative_gap: r.relative_gap,
        }
    }
}

impl Outcome {
    fn deviation(lhs: f64, rhs: f64, scale: f64) -> Self {
        let gap = -(lhs - rhs).abs();
        Outcome {
            lhs,
            rhs,
            gap,
            relative_gap: gap / scale.max(1.0),
        }
    }

    fn min(self, other: Outcome) -> Outcome {
        if other.relative_gap < self.relative_gap {
            other
        } else {
            self
        }
    }
}

fn label_for(f: &OperatorFunction) -> String {
    format!("{}/{}", f.name(), f.class())
}

impl Variant {
    pub fn source(&self) -> Source {
        match self.check {
            Check::OrderedReduction => Source::Ordered,
            Check::CommutingOracle => Source::Commuting,
            _ => Source::Configured,
        }
    }

    /// Instantiates `check` over the parameters it sweeps.
    pub fn expand(check: Check, functions: &[OperatorFunction]) -> Vec<Variant> {
        let v = |label: String, param: Param| Variant { check, label, param };
        let in_class = |class: FunctionClass| {
            let mut seen: Vec<OperatorFunction> = Vec::new();
            for f in functions.iter().filter_map(|f| f.in_class(class)) {
                if !seen.iter().any(|g| g.name() == f.name()) {
                    seen.push(f);
                }
            }
            seen
        };
        match check {
            Check::Monotone => in_class(FunctionClass::Monotone)
                .into_iter()
                .map(|f| v(f.name().to_string(), Param::Function(f)))
                .collect(),
            Check::Convex | Check::Klein => in_class(FunctionClass::Convex)
                .into_iter()
                .map(|f| v(f.name().to_string(), Param::Function(f)))
                .collect(),
            Check::ZeeIdentity | Check::CrossTerms | Check::OrderedReduction | Check::Conjecture => functions
                .iter()
                .map(|f| v(label_for(f), Param::Function(f.clone())))
                .collect(),
            Check::CommutingOracle => vec![v("scalar_sums".into(), Param::Functions(functions.to_vec()))],
            Check::Ricard => RICARD_POWERS.iter().map(|&p| v(format!("p={p}"), Param::Power(p))).collect(),
            Check::Chain => CHAIN_POWERS.iter().map(|&p| v(format!("p={p}"), Param::Power(p))).collect(),
            Check::ChainLeft => CHAIN_LEFT_POWERS.iter().map(|&p| v(format!("p={p}"), Param::Power(p))).collect(),
            Check::PowersStormer => STORMER_MIXING.iter().map(|&s| v(format!("s={s}"), Param::Mixing(s))).collect(),
            Check::AndoTrace | Check::AndoKyfan => {
                ANDO_POWERS.iter().map(|&p| v(format!("p={p}"), Param::Power(p))).collect()
            }
            Check::AndoTheta => ANDO_THETAS
                .iter()
                .flat_map(|&t| ANDO_QS.iter().map(move |&q| (t, q)))
                .map(|(t, q)| v(format!("theta={t},q={q}"), Param::Theta(t, q)))
                .collect(),
            Check::Holder => HOLDER_PAIRS
                .iter()
                .map(|&(p, q)| v(format!("p={p},q={q:.6}"), Param::Holder(p, q)))
                .collect(),
            Check::Resolvent => RESOLVENT_SHIFTS.iter().map(|&s| v(format!("s={s:e}"), Param::Shift(s))).collect(),
        }
    }
}

/// Matrices a trial evaluates its checks on.
pub(crate) struct Instance<'a> {
    pub pair: &'a PsdPair,
    /// Second independent pair, used by the two-matrix Hölder check.
    pub other: Option<&'a PsdPair>,
    /// Known eigenvalues when the pair commutes.
    pub commuting: Option<&'a crate::sampler::CommutingPair>,
}

pub(crate) fn evaluate(variant: &Variant, inst: &Instance<'_>) -> Result<Outcome> {
    let pair = inst.pair;
    let out = match (&variant.check, &variant.param) {
        (Check::Monotone, Param::Function(f)) => Outcome::from(&pair.monotone_gap(f)?),
        (Check::Convex, Param::Function(f)) => Outcome::from(&pair.convex_gap(f)?),
        (Check::Klein, Param::Function(f)) => Outcome::from(&pair.klein_gap(f)?),
        (Check::Ricard, Param::Power(p)) => Outcome::from(&pair.ricard_gap(*p)?),
        (Check::Chain, Param::Power(p)) => {
            let c = pair.interpolation_chain(*p)?;
            Outcome::from(&c.left_gap).min(Outcome::from(&c.right_gap))
        }
        (Check::ChainLeft, Param::Power(p)) => Outcome::from(&pair.chain_left_gap(*p)?),
        (Check::PowersStormer, Param::Mixing(s)) => Outcome::from(&pair.powers_stormer_gap(*s)?),
        (Check::AndoTrace, Param::Power(p)) => Outcome::from(&pair.ando_gap(*p, NormSpec::trace())?),
        (Check::AndoKyfan, Param::Power(p)) => {
            let mut worst: Option<Outcome> = None;
            for k in 1..=pair.dim() {
                let o = Outcome::from(&pair.ando_gap(*p, NormSpec::KyFan(k))?);
                worst = Some(worst.map_or(o, |w| w.min(o)));
            }
            worst.expect("dimension is at least one")
        }
        (Check::AndoTheta, Param::Theta(t, q)) => Outcome::from(&pair.ando_theta_gap(*t, *q)?),
        (Check::Holder, Param::Holder(p, q)) => {
            let y = inst.other.map(|o| o.diff()).unwrap_or(pair.diff());
            Outcome::from(&holder_gap(pair.diff(), y, *p, *q)?)
        }
        (Check::Resolvent, Param::Shift(s)) => {
            let (b, c) = (pair.b(), pair.a());
            let residual = resolvent_residual(b, c, *s)?;
            let scale = b.frobenius_norm() + c.frobenius_norm() + s;
            Outcome {
                lhs: residual,
                rhs: 0.0,
                gap: -residual,
                relative_gap: -residual / scale.max(1.0),
            }
        }
        (Check::ZeeIdentity, Param::Function(f)) => {
            let z = pair.zee_decomposition()?;
            let terms = z.terms(pair, f)?;
            let total = pair.trace_diff_product(f)?;
            Outcome::deviation(terms.sum(), total, total.abs())
        }
        (Check::CrossTerms, Param::Function(f)) => {
            let t = pair.zee_decomposition()?.terms(pair, f)?.terms;
            let gap = match f.class() {
                FunctionClass::Monotone => -t[1].max(t[3]),
                FunctionClass::Convex => t[1].min(t[3]),
            };
            let scale = t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            Outcome {
                lhs: t[1],
                rhs: t[3],
                gap,
                relative_gap: gap / scale.max(1.0),
            }
        }
        (Check::OrderedReduction, Param::Function(f)) => ordered_reduction(pair, f)?,
        (Check::CommutingOracle, Param::Functions(fs)) => {
            let cp = inst
                .commuting
                .ok_or_else(|| Error::InvalidParameter("commuting oracle needs a commuting pair".into()))?;
            let worst = super::oracle::compare(cp, fs)?
                .into_iter()
                .max_by(|x, y| x.deviation().total_cmp(&y.deviation()));
            match worst {
                Some(c) => Outcome {
                    lhs: c.library,
                    rhs: c.oracle,
                    gap: -(c.library - c.oracle).abs(),
                    relative_gap: -c.deviation(),
                },
                None => Outcome {
                    lhs: 0.0,
                    rhs: 0.0,
                    gap: 0.0,
                    relative_gap: 0.0,
                },
            }
        }
        (Check::Conjecture, Param::Function(f)) => pair
            .conjecture_gaps_all_k(f)?
            .iter()
            .map(Outcome::from)
            .reduce(Outcome::min)
            .expect("dimension is at least one"),
        (check, _) => unreachable!("variant of {check} built with mismatched parameters"),
    };
    Ok(out)
}

/// With `A ⪰ B` the decomposition has `C₋ = 0` and `Z = A`, so the theorem
/// gap can be recomputed from `C₊` and the cross terms alone.
fn ordered_reduction(pair: &PsdPair, f: &OperatorFunction) -> Result<Outcome> {
    if !pair.is_ordered() {
        return Err(Error::InvalidParameter("ordered reduction needs A >= B".into()));
    }
    let z = pair.zee_decomposition()?;
    let lhs = z.terms(pair, f)?.sum();
    let rhs = crate::symla::psd_spectrum(&z.c_plus)?
        .eigenvalues()
        .iter()
        .map(|&c| c * f.value(c))
        .sum::<f64>();
    let direct = match f.class() {
        FunctionClass::Monotone => pair.monotone_gap(f)?,
        FunctionClass::Convex => pair.convex_gap(f)?,
    };
    let routed = match f.class() {
        FunctionClass::Monotone => rhs - lhs,
        FunctionClass::Convex => lhs - rhs,
    };
    let scale = direct.lhs.abs().max(direct.rhs.abs());
    Ok(Outcome::deviation(direct.gap, routed, scale))
}
