//! Randomized verification suites, conjecture search and reports.
//!
//! Every trial draws its matrices from a stream seeded by
//! `derive_seed(derive_seed(seed, dim), trial)`, so a suite produces the
//! same report whether trials run serially or on the rayon pool.

mod checks;
pub mod oracle;
mod report;
mod search;
mod tools;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::{
    Check, ANDO_POWERS, ANDO_QS, ANDO_THETAS, CHAIN_LEFT_POWERS, CHAIN_POWERS, HOLDER_PAIRS, RESOLVENT_SHIFTS,
    RICARD_POWERS, STORMER_MIXING,
};
pub use report::{emit_report, CheckAggregate, Emit, OutputFormat, SuiteReport, WorstInstance};
pub use search::{
    search_counterexample, Candidate, ClassSummary, FunctionSummary, InstanceClass, SearchConfig, SearchReport, SearchSampling,
    SearchVerdict,
};
pub use tools::{evaluate_named, log_grid, quadrature_check, EvalParams, QuadPoint, INEQUALITIES};

use checks::{evaluate, Instance, Outcome, Source, Variant};
use crate::error::{Error, Result};
use crate::funcat::OperatorFunction;
use crate::ineq::{PsdPair, GAP_TOL};
use crate::sampler::{derive_seed, random_commuting_pair, random_pair, CommutingPair, SampleKind, SampleSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default monotone selectors: `t^p` for `p = 0.1, 0.2, ..., 1.0` and `log(1+t)`.
pub fn default_monotone() -> Vec<OperatorFunction> {
    let mut v: Vec<OperatorFunction> = (1..=10)
        .map(|i| OperatorFunction::monotone_power(i as f64 / 10.0).expect("grid power is in range"))
        .collect();
    v.push(OperatorFunction::log1p());
    v
}

/// Default convex selectors: `t^p` for `p = 1.0, 1.1, ..., 2.0` and `t²`.
pub fn default_convex() -> Vec<OperatorFunction> {
    let mut v: Vec<OperatorFunction> = (10..=20)
        .map(|i| OperatorFunction::convex_power(i as f64 / 10.0).expect("grid power is in range"))
        .collect();
    v.push(OperatorFunction::square());
    v
}

/// `t^p` on a 0.05 grid over `(0, 1]` and `[1, 2]`, plus `log(1+t)`.
pub fn power_grid() -> Vec<OperatorFunction> {
    let mut v: Vec<OperatorFunction> = (1..=20)
        .map(|i| OperatorFunction::monotone_power(i as f64 / 20.0).expect("grid power is in range"))
        .collect();
    v.extend((20..=40).map(|i| OperatorFunction::convex_power(i as f64 / 20.0).expect("grid power is in range")));
    v.push(OperatorFunction::log1p());
    v
}

/// Expands function selectors.
///
/// `all` is the default monotone and convex lists, `monotone` and `convex`
/// either half, `power:grid` the search grid, `catalog` the full catalog.
/// Anything else is parsed as a single function (`power:0.5`, `log1p`, ...).
/// Duplicates (same name and class) are dropped.
pub fn resolve_functions(selectors: &[String]) -> Result<Vec<OperatorFunction>> {
    let mut out: Vec<OperatorFunction> = Vec::new();
    for s in selectors {
        let picked = match s.trim() {
            "all" => default_monotone().into_iter().chain(default_convex()).collect(),
            "monotone" => default_monotone(),
            "convex" => default_convex(),
            "power:grid" => power_grid(),
            "catalog" => crate::funcat::catalog(),
            other => vec![other.parse::<OperatorFunction>()?],
        };
        for f in picked {
            if !out.iter().any(|g| g.name() == f.name() && g.class() == f.class()) {
                out.push(f);
            }
        }
    }
    Ok(out)
}

/// Splits `"a,b,c"` into trimmed, non-empty pieces.
pub fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub functions: Vec<String>,
    pub checks: Vec<String>,
    pub tolerance: f64,
    pub seed: u64,
    pub format: OutputFormat,
    /// Pair kind for checks that take a generic pair.
    pub sample: SampleKind,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            dims: vec![2, 4, 8],
            trials: 1000,
            functions: vec!["all".into()],
            checks: vec!["all".into()],
            tolerance: GAP_TOL,
            seed: 42,
            format: OutputFormat::Json,
            sample: SampleKind::Wishart,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidParameter("dims must be a non-empty list of positive sizes".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        for &d in &self.dims {
            SampleSpec::new(d, self.sample.clone(), self.seed).validate()?;
        }
        Check::resolve(&self.checks)?;
        resolve_functions(&self.functions)?;
        Ok(())
    }
}

/// How trials are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Serial,
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    run_suite_with(cfg, Execution::Parallel)
}

/// Seed of trial `trial` at dimension `dim`.
pub fn trial_seed(seed: u64, dim: usize, trial: u64) -> u64 {
    derive_seed(derive_seed(seed, dim as u64), trial)
}

/// Stream offsets for pairs a trial draws besides the configured one.
const ORDERED_STREAM: u64 = 1;
const COMMUTING_STREAM: u64 = 2;
const PARTNER_STREAM: u64 = 3;

struct TrialPairs {
    configured: Option<PsdPair>,
    partner: Option<PsdPair>,
    ordered: Option<PsdPair>,
    commuting: Option<(CommutingPair, PsdPair)>,
}

fn source_seed(seed: u64, source: Source) -> u64 {
    match source {
        Source::Configured => seed,
        Source::Ordered => derive_seed(seed, ORDERED_STREAM),
        Source::Commuting => derive_seed(seed, COMMUTING_STREAM),
    }
}

fn draw(cfg: &SuiteConfig, dim: usize, seed: u64, source: Source) -> Result<(crate::symla::SymMatrix, crate::symla::SymMatrix)> {
    let s = source_seed(seed, source);
    match source {
        Source::Configured => random_pair(&SampleSpec::new(dim, cfg.sample.clone(), s)),
        Source::Ordered => random_pair(&SampleSpec::new(dim, SampleKind::OrderedPair, s)),
        Source::Commuting => {
            let p = random_commuting_pair(dim, s)?;
            Ok((p.a, p.b))
        }
    }
}

fn run_trial(cfg: &SuiteConfig, variants: &[Variant], dim: usize, seed: u64) -> Result<Vec<Outcome>> {
    let needs = |src: Source| variants.iter().any(|v| v.source() == src);
    let pair_of = |src: Source| -> Result<Option<PsdPair>> {
        if !needs(src) {
            return Ok(None);
        }
        let (a, b) = draw(cfg, dim, seed, src)?;
        PsdPair::new(&a, &b).map(Some)
    };
    let pairs = TrialPairs {
        configured: pair_of(Source::Configured)?,
        partner: if variants.iter().any(|v| v.check == Check::Holder) {
            let (a, b) = random_pair(&SampleSpec::new(dim, cfg.sample.clone(), derive_seed(seed, PARTNER_STREAM)))?;
            Some(PsdPair::new(&a, &b)?)
        } else {
            None
        },
        ordered: pair_of(Source::Ordered)?,
        commuting: if needs(Source::Commuting) {
            let cp = random_commuting_pair(dim, source_seed(seed, Source::Commuting))?;
            let pair = PsdPair::new(&cp.a, &cp.b)?;
            Some((cp, pair))
        } else {
            None
        },
    };
    variants
        .iter()
        .map(|v| {
            let inst = match v.source() {
                Source::Configured => Instance {
                    pair: pairs.configured.as_ref().expect("configured pair drawn"),
                    other: pairs.partner.as_ref(),
                    commuting: None,
                },
                Source::Ordered => Instance {
                    pair: pairs.ordered.as_ref().expect("ordered pair drawn"),
                    other: None,
                    commuting: None,
                },
                Source::Commuting => {
                    let (cp, pair) = pairs.commuting.as_ref().expect("commuting pair drawn");
                    Instance {
                        pair,
                        other: None,
                        commuting: Some(cp),
                    }
                }
            };
            evaluate(v, &inst).map_err(|e| {
                Error::InvalidParameter(format!("{} [{}] dim {dim} seed {seed}: {e}", v.check, v.label))
            })
        })
        .collect()
}

/// Exact-order-independent pairwise summation.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

pub fn run_suite_with(cfg: &SuiteConfig, exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    cfg.validate()?;
    let checks = Check::resolve(&cfg.checks)?;
    let functions = resolve_functions(&cfg.functions)?;
    let variants: Vec<Variant> = checks.iter().flat_map(|&c| Variant::expand(c, &functions)).collect();

    // per_dim[d][trial][variant]
    let mut per_dim: Vec<Vec<Vec<Outcome>>> = Vec::with_capacity(cfg.dims.len());
    for &dim in &cfg.dims {
        let trial = |t: usize| run_trial(cfg, &variants, dim, trial_seed(cfg.seed, dim, t as u64));
        let rows: Result<Vec<Vec<Outcome>>> = match exec {
            Execution::Parallel => (0..cfg.trials).into_par_iter().map(trial).collect(),
            Execution::Serial => (0..cfg.trials).map(trial).collect(),
        };
        per_dim.push(rows?);
    }

    let mut aggregates = Vec::new();
    if cfg.trials > 0 {
        for (vi, v) in variants.iter().enumerate() {
            for (di, &dim) in cfg.dims.iter().enumerate() {
                let outcomes: Vec<&Outcome> = per_dim[di].iter().map(|row| &row[vi]).collect();
                aggregates.push(aggregate(cfg, v, dim, &outcomes)?);
            }
        }
    }
    log::info!("suite: {} aggregates over {} dims", aggregates.len(), cfg.dims.len());

    Ok(SuiteReport {
        version: VERSION.to_string(),
        seed: cfg.seed,
        config: cfg.clone(),
        checks: aggregates,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

fn aggregate(cfg: &SuiteConfig, v: &Variant, dim: usize, outcomes: &[&Outcome]) -> Result<CheckAggregate> {
    let gaps: Vec<f64> = outcomes.iter().map(|o| o.gap).collect();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    // Rounding in the mean can land one ulp under the minimum.
    let mean_gap = (pairwise_sum(&gaps) / gaps.len() as f64).max(min_gap);
    let (worst_trial, worst) = outcomes
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.relative_gap.total_cmp(&y.1.relative_gap))
        .expect("at least one trial");
    let violations = outcomes.iter().filter(|o| o.relative_gap < -cfg.tolerance).count();
    let near_zero = worst.relative_gap.abs() <= 10.0 * cfg.tolerance;
    let worst_instance = if violations > 0 || near_zero {
        let seed = trial_seed(cfg.seed, dim, worst_trial as u64);
        let (a, b) = draw(cfg, dim, seed, v.source())?;
        Some(WorstInstance {
            trial: worst_trial as u64,
            seed: source_seed(seed, v.source()),
            params: v.label.clone(),
            a: a.to_rows(),
            b: b.to_rows(),
            lhs: worst.lhs,
            rhs: worst.rhs,
            gap: worst.gap,
            relative_gap: worst.relative_gap,
        })
    } else {
        None
    };
    Ok(CheckAggregate {
        name: v.check.name().to_string(),
        function: v.label.clone(),
        dim,
        trials: outcomes.len(),
        min_gap,
        mean_gap,
        min_relative_gap: worst.relative_gap,
        violations,
        worst_instance,
    })
}


#[cfg(test)]
mod tests {
    use super::*;

    fn small(checks: &[&str]) -> SuiteConfig {
        SuiteConfig {
            dims: vec![2, 3],
            trials: 6,
            checks: checks.iter().map(|s| s.to_string()).collect(),
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn zero_trials_is_empty() {
        let cfg = SuiteConfig {
            trials: 0,
            ..small(&["all"])
        };
        let r = run_suite(&cfg).unwrap();
        assert!(r.checks.is_empty());
        assert_eq!(r.total_violations(), 0);
    }

    #[test]
    fn every_check_runs_without_violations() {
        let mut names: Vec<&str> = Check::ALL.iter().map(|c| c.name()).collect();
        names.retain(|n| *n != "conjecture");
        let r = run_suite(&small(&names)).unwrap();
        assert_eq!(r.total_violations(), 0, "{:#?}", r.checks.iter().filter(|c| c.violations > 0).collect::<Vec<_>>());
        for c in &r.checks {
            assert!(c.min_gap <= c.mean_gap);
            assert!(c.violations <= c.trials);
        }
    }

    #[test]
    fn serial_equals_parallel() {
        let cfg = small(&["monotone", "ricard", "commuting_oracle"]);
        let mut a = run_suite_with(&cfg, Execution::Serial).unwrap();
        let mut b = run_suite_with(&cfg, Execution::Parallel).unwrap();
        a.wall_time_ms = 0;
        b.wall_time_ms = 0;
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(run_suite(&small(&["nonsense"])).is_err());
        let cfg = SuiteConfig {
            functions: vec!["power:-1".into()],
            ..small(&["monotone"])
        };
        assert!(run_suite(&cfg).is_err());
        let cfg = SuiteConfig { dims: vec![], ..small(&["monotone"]) };
        assert!(run_suite(&cfg).is_err());
    }

    #[test]
    fn ricard_at_two_reports_equality_instance() {
        let r = run_suite(&small(&["ricard"])).unwrap();
        let p2 = r.checks.iter().find(|c| c.function == "p=2").unwrap();
        assert!(p2.min_relative_gap.abs() < 1e-12);
        assert!(p2.worst_instance.is_some());
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
    }

    #[test]
    fn function_selectors() {
        assert_eq!(resolve_functions(&["all".into()]).unwrap().len(), 23);
        assert_eq!(resolve_functions(&["power:grid".into()]).unwrap().len(), 42);
        assert!(resolve_functions(&["bogus".into()]).is_err());
    }
}
