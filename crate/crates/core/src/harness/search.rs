//! Counterexample search for the conjectured norm inequality.
//!
//! Two phases: independent random instances, then restarts that descend on
//! the gap by perturbing one coordinate at a time. Instances are stored as
//! Gaussian factors `G` with `A = GᵀG`, so every step stays PSD. Commuting
//! instances are stored as a shared basis plus two spectra instead.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{json_pretty, Emit, OutputFormat};
use super::{resolve_functions, VERSION};
use crate::error::{Error, Result};
use crate::funcat::{FunctionClass, OperatorFunction};
use crate::ineq::{GapReport, PsdPair, GAP_TOL};
use crate::sampler::{conjugate, derive_seed, random_orthogonal, GaussianFactor, COMMUTING_SPECTRUM};
use crate::symla::{SymMatrix, JACOBI_TOL};
use crate::uinorm::NormSpec;

/// Number of lowest instances kept in the report.
pub const KEEP_LOWEST: usize = 10;
/// Factor by which re-verification tightens the eigensolver tolerance.
pub const REVERIFY_TIGHTENING: f64 = 100.0;
const DESCENT_STREAM: u64 = 0xD35C_E17;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchSampling {
    /// Alternate strictly positive and rank-deficient instances.
    #[default]
    Mixed,
    /// Full-rank Wishart instances only.
    Strict,
    /// Commuting pairs only.
    Commuting,
}

impl std::str::FromStr for SearchSampling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mixed" => Ok(SearchSampling::Mixed),
            "strict" => Ok(SearchSampling::Strict),
            "commuting" => Ok(SearchSampling::Commuting),
            other => Err(Error::Parse(format!("unknown sampling `{other}` (mixed, strict, commuting)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceClass {
    Strict,
    RankDeficient,
    Commuting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchVerdict {
    NoViolationFound,
    ViolationCandidate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub dims: Vec<usize>,
    pub functions: Vec<String>,
    /// `kyfan:all` or any [`NormSpec`]; Ky Fan indices above a dimension are
    /// skipped for that dimension.
    pub norms: Vec<String>,
    pub random_instances: usize,
    pub restarts: usize,
    pub steps: usize,
    pub step_scale: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub sampling: SearchSampling,
    pub format: OutputFormat,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            dims: vec![6],
            functions: vec!["power:grid".into()],
            norms: vec!["kyfan:all".into()],
            random_instances: 1000,
            restarts: 200,
            steps: 500,
            step_scale: 0.1,
            tolerance: GAP_TOL,
            seed: 7,
            sampling: SearchSampling::Mixed,
            format: OutputFormat::Json,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidParameter("dims must be a non-empty list of positive sizes".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("step scale must be positive, got {}", self.step_scale)));
        }
        if resolve_functions(&self.functions)?.is_empty() {
            return Err(Error::InvalidParameter("no functions selected".into()));
        }
        for &d in &self.dims {
            if self.norms_for(d)?.is_empty() {
                return Err(Error::InvalidParameter(format!("no norm applies at dimension {d}")));
            }
        }
        Ok(())
    }

    fn norms_for(&self, dim: usize) -> Result<Vec<NormSpec>> {
        let mut out = Vec::new();
        for s in &self.norms {
            if s.trim() == "kyfan:all" {
                out.extend((1..=dim).map(NormSpec::KyFan));
                continue;
            }
            let spec: NormSpec = s.parse()?;
            match spec {
                NormSpec::KyFan(k) if k > dim => {}
                spec => {
                    spec.validate(dim)?;
                    out.push(spec);
                }
            }
        }
        out.dedup();
        Ok(out)
    }
}

/// An evaluated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub dim: usize,
    pub class: InstanceClass,
    pub function: String,
    pub function_class: FunctionClass,
    pub norm: String,
    /// Position of `norm` among the norms searched at this dimension
    /// (for `kyfan:all` this is `k − 1`).
    pub norm_index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub relative_gap: f64,
    /// `random` or `descent`.
    pub origin: String,
    pub seed: u64,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    /// Set once the candidate was recomputed at the tightened tolerance.
    #[serde(default)]
    pub reverified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: InstanceClass,
    pub instances: usize,
    pub best_relative_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSummary {
    pub function: String,
    pub class: FunctionClass,
    pub best_relative_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub version: String,
    pub seed: u64,
    pub config: SearchConfig,
    pub best_gap: f64,
    pub best_relative_gap: f64,
    pub best: Option<Candidate>,
    pub lowest: Vec<Candidate>,
    pub classes: Vec<ClassSummary>,
    /// Lowest relative gap seen per function, over instances where that
    /// function was the worst one.
    pub functions: Vec<FunctionSummary>,
    /// Instances evaluated, counting every descent step.
    pub iterations: u64,
    pub restarts: usize,
    pub random_instances: usize,
    /// Candidates below `−ε` that did not survive re-verification.
    pub downgraded: usize,
    pub verdict: SearchVerdict,
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug)]
enum Point {
    Factors { ga: GaussianFactor, gb: GaussianFactor },
    Commuting { q: Vec<f64>, la: Vec<f64>, lb: Vec<f64> },
}

impl Point {
    fn sample(dim: usize, class: InstanceClass, rng: &mut ChaCha8Rng) -> Point {
        match class {
            InstanceClass::Strict => Point::Factors {
                ga: GaussianFactor::sample(dim, dim, rng),
                gb: GaussianFactor::sample(dim, dim, rng),
            },
            InstanceClass::RankDeficient => {
                let ra = rng.random_range(1..dim);
                let rb = rng.random_range(1..dim);
                Point::Factors {
                    ga: GaussianFactor::sample(ra, dim, rng),
                    gb: GaussianFactor::sample(rb, dim, rng),
                }
            }
            InstanceClass::Commuting => {
                let q = random_orthogonal(dim, rng);
                let (lo, hi) = COMMUTING_SPECTRUM;
                let la = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
                let lb = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
                Point::Commuting { q, la, lb }
            }
        }
    }

    fn matrices(&self) -> (SymMatrix, SymMatrix) {
        match self {
            Point::Factors { ga, gb } => (ga.gram(), gb.gram()),
            Point::Commuting { q, la, lb } => (conjugate(q, la), conjugate(q, lb)),
        }
    }

    /// Moves one coordinate by a Gaussian step.
    fn perturb(&mut self, scale: f64, rng: &mut ChaCha8Rng) {
        let step = scale * rng.sample::<f64, _>(StandardNormal);
        match self {
            Point::Factors { ga, gb } => {
                let na = ga.entries.len();
                let i = rng.random_range(0..na + gb.entries.len());
                if i < na {
                    ga.entries[i] += step;
                } else {
                    gb.entries[i - na] += step;
                }
            }
            Point::Commuting { la, lb, .. } => {
                let n = la.len();
                let i = rng.random_range(0..2 * n);
                let v = if i < n { &mut la[i] } else { &mut lb[i - n] };
                *v = (*v + step).abs();
            }
        }
    }
}

fn class_for(sampling: SearchSampling, dim: usize, index: usize) -> InstanceClass {
    match sampling {
        SearchSampling::Commuting => InstanceClass::Commuting,
        SearchSampling::Mixed if dim > 1 && index % 2 == 1 => InstanceClass::RankDeficient,
        _ => InstanceClass::Strict,
    }
}

/// Lowest relative gap over `norms` for one function.
fn worst_over_norms(pair: &PsdPair, f: &OperatorFunction, norms: &[NormSpec]) -> Result<(usize, GapReport)> {
    let all_k = norms.iter().enumerate().all(|(i, n)| *n == NormSpec::KyFan(i + 1)) && norms.len() == pair.dim();
    let reports: Vec<GapReport> = if all_k {
        pair.conjecture_gaps_all_k(f)?
    } else {
        norms.iter().map(|n| pair.conjecture_gap(f, *n)).collect::<Result<_>>()?
    };
    Ok(reports
        .into_iter()
        .enumerate()
        .min_by(|x, y| x.1.relative_gap.total_cmp(&y.1.relative_gap))
        .expect("at least one norm"))
}

struct Evaluated {
    function: usize,
    norm_index: usize,
    report: GapReport,
}

fn evaluate(pair: &PsdPair, fs: &[OperatorFunction], only: Option<usize>, norms: &[NormSpec]) -> Result<Evaluated> {
    let mut best: Option<Evaluated> = None;
    for (fi, f) in fs.iter().enumerate() {
        if only.is_some_and(|o| o != fi) {
            continue;
        }
        let (norm_index, report) = worst_over_norms(pair, f, norms)?;
        if best.as_ref().is_none_or(|b| report.relative_gap < b.report.relative_gap) {
            best = Some(Evaluated {
                function: fi,
                norm_index,
                report,
            });
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("no functions selected".into()))
}

struct Ctx<'a> {
    cfg: &'a SearchConfig,
    functions: Vec<OperatorFunction>,
}

impl Ctx<'_> {
    fn candidate(&self, e: &Evaluated, dim: usize, class: InstanceClass, a: &SymMatrix, b: &SymMatrix, origin: &str, seed: u64) -> Result<Candidate> {
        let f = &self.functions[e.function];
        let norms = self.cfg.norms_for(dim)?;
        Ok(Candidate {
            dim,
            class,
            function: f.name().to_string(),
            function_class: f.class(),
            norm: norms[e.norm_index].to_string(),
            norm_index: e.norm_index,
            lhs: e.report.lhs,
            rhs: e.report.rhs,
            gap: e.report.gap,
            relative_gap: e.report.relative_gap,
            origin: origin.to_string(),
            seed,
            a: a.to_rows(),
            b: b.to_rows(),
            reverified: false,
        })
    }

    fn random_instance(&self, i: usize) -> Result<Option<Candidate>> {
        let dim = self.cfg.dims[i % self.cfg.dims.len()];
        let class = class_for(self.cfg.sampling, dim, i / self.cfg.dims.len());
        let seed = derive_seed(self.cfg.seed, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = Point::sample(dim, class, &mut rng).matrices();
        let norms = self.cfg.norms_for(dim)?;
        let pair = match PsdPair::new(&a, &b) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("random instance {i} skipped: {e}");
                return Ok(None);
            }
        };
        let e = evaluate(&pair, &self.functions, None, &norms)?;
        self.candidate(&e, dim, class, &a, &b, "random", seed).map(Some)
    }

    /// Returns the final candidate and the number of evaluations spent.
    fn restart(&self, r: usize) -> Result<(Option<Candidate>, u64)> {
        let dim = self.cfg.dims[r % self.cfg.dims.len()];
        let class = class_for(self.cfg.sampling, dim, r / self.cfg.dims.len());
        let seed = derive_seed(derive_seed(self.cfg.seed, DESCENT_STREAM), r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let norms = self.cfg.norms_for(dim)?;
        let mut point = Point::sample(dim, class, &mut rng);
        let (a, b) = point.matrices();
        let Ok(pair) = PsdPair::new(&a, &b) else {
            return Ok((None, 1));
        };
        // Restarts cycle through the functions so each one gets descended on.
        let fixed = Some(r % self.functions.len());
        let mut best = evaluate(&pair, &self.functions, fixed, &norms)?;
        let mut best_mats = (a, b);
        let mut evals = 1;
        for _ in 0..self.cfg.steps {
            let mut trial = point.clone();
            trial.perturb(self.cfg.step_scale, &mut rng);
            let (a, b) = trial.matrices();
            evals += 1;
            let Ok(pair) = PsdPair::new(&a, &b) else { continue };
            let Ok(e) = evaluate(&pair, &self.functions, fixed, &norms) else { continue };
            if e.report.relative_gap < best.report.relative_gap {
                best = e;
                point = trial;
                best_mats = (a, b);
            }
        }
        let c = self.candidate(&best, dim, class, &best_mats.0, &best_mats.1, "descent", seed)?;
        Ok((Some(c), evals))
    }

    /// Recomputes `c` with the eigensolver tolerance tightened.
    fn reverify(&self, c: &Candidate) -> Result<Candidate> {
        let a = SymMatrix::from_rows(&c.a)?;
        let b = SymMatrix::from_rows(&c.b)?;
        let pair = PsdPair::with_tol(&a, &b, JACOBI_TOL / REVERIFY_TIGHTENING)?;
        let f = self
            .functions
            .iter()
            .find(|f| f.name() == c.function && f.class() == c.function_class)
            .expect("candidate function comes from the config");
        let norm = self.cfg.norms_for(c.dim)?[c.norm_index];
        let r = pair.conjecture_gap(f, norm)?;
        Ok(Candidate {
            lhs: r.lhs,
            rhs: r.rhs,
            gap: r.gap,
            relative_gap: r.relative_gap,
            reverified: true,
            ..c.clone()
        })
    }
}

pub fn search_counterexample(cfg: &SearchConfig) -> Result<SearchReport> {
    let start = Instant::now();
    cfg.validate()?;
    let ctx = Ctx {
        cfg,
        functions: resolve_functions(&cfg.functions)?,
    };

    let random: Vec<Option<Candidate>> = (0..cfg.random_instances)
        .into_par_iter()
        .map(|i| ctx.random_instance(i))
        .collect::<Result<_>>()?;
    let descents: Vec<(Option<Candidate>, u64)> =
        (0..cfg.restarts).into_par_iter().map(|r| ctx.restart(r)).collect::<Result<_>>()?;

    let iterations = cfg.random_instances as u64 + descents.iter().map(|d| d.1).sum::<u64>();
    let mut all: Vec<Candidate> = random.into_iter().flatten().chain(descents.into_iter().filter_map(|d| d.0)).collect();

    let mut classes: Vec<ClassSummary> = Vec::new();
    for c in &all {
        match classes.iter_mut().find(|s| s.class == c.class) {
            Some(s) => {
                s.instances += 1;
                s.best_relative_gap = s.best_relative_gap.min(c.relative_gap);
            }
            None => classes.push(ClassSummary {
                class: c.class,
                instances: 1,
                best_relative_gap: c.relative_gap,
            }),
        }
    }
    classes.sort_by_key(|s| s.class);

    let mut functions: Vec<FunctionSummary> = Vec::new();
    for c in &all {
        match functions.iter_mut().find(|s| s.function == c.function && s.class == c.function_class) {
            Some(s) => s.best_relative_gap = s.best_relative_gap.min(c.relative_gap),
            None => functions.push(FunctionSummary {
                function: c.function.clone(),
                class: c.function_class,
                best_relative_gap: c.relative_gap,
            }),
        }
    }

    let by_gap = |x: &Candidate, y: &Candidate| x.relative_gap.total_cmp(&y.relative_gap);
    all.sort_by(by_gap);

    let mut downgraded = 0;
    for c in all.iter_mut().take_while(|c| c.relative_gap < -cfg.tolerance) {
        let checked = ctx.reverify(c)?;
        if checked.relative_gap < -cfg.tolerance {
            log::warn!(
                "violation candidate survives re-verification: {} {} dim {} relative gap {:e}",
                c.function,
                c.norm,
                c.dim,
                checked.relative_gap
            );
        } else {
            downgraded += 1;
            log::warn!(
                "candidate downgraded after re-verification: {} {} dim {} relative gap {:e} -> {:e}",
                c.function,
                c.norm,
                c.dim,
                c.relative_gap,
                checked.relative_gap
            );
        }
        *c = checked;
    }
    all.sort_by(by_gap);

    let best = all.first().cloned();
    let verdict = match &best {
        Some(b) if b.relative_gap < -cfg.tolerance => SearchVerdict::ViolationCandidate,
        _ => SearchVerdict::NoViolationFound,
    };
    all.truncate(KEEP_LOWEST);
    log::info!("search: {iterations} evaluations, verdict {verdict:?}");

    Ok(SearchReport {
        version: VERSION.to_string(),
        seed: cfg.seed,
        config: cfg.clone(),
        best_gap: best.as_ref().map_or(0.0, |b| b.gap),
        best_relative_gap: best.as_ref().map_or(0.0, |b| b.relative_gap),
        best,
        lowest: all,
        classes,
        functions,
        iterations,
        restarts: cfg.restarts,
        random_instances: cfg.random_instances,
        downgraded,
        verdict,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    rank: usize,
    dim: usize,
    class: InstanceClass,
    function: &'a str,
    norm: &'a str,
    lhs: f64,
    rhs: f64,
    gap: f64,
    relative_gap: f64,
    origin: &'a str,
    seed: u64,
}

impl Emit for SearchReport {
    fn write_json(&self, w: &mut dyn Write) -> Result<()> {
        json_pretty(self, w)
    }

    fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (rank, c) in self.lowest.iter().enumerate() {
            out.serialize(CsvRow {
                rank: rank + 1,
                dim: c.dim,
                class: c.class,
                function: &c.function,
                norm: &c.norm,
                lhs: c.lhs,
                rhs: c.rhs,
                gap: c.gap,
                relative_gap: c.relative_gap,
                origin: &c.origin,
                seed: c.seed,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    fn write_text(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(
            w,
            "search seed={} iterations={} restarts={} random={} wall_time={}ms",
            self.seed, self.iterations, self.restarts, self.random_instances, self.wall_time_ms
        )?;
        writeln!(w, "verdict: {:?}  best relative gap {:.4e}  downgraded {}", self.verdict, self.best_relative_gap, self.downgraded)?;
        for s in &self.classes {
            writeln!(w, "  {:?}: {} instances, best {:.4e}", s.class, s.instances, s.best_relative_gap)?;
        }
        writeln!(w, "{:>4} {:>4} {:<15} {:<12} {:<10} {:>12} {:<8}", "rank", "dim", "class", "function", "norm", "rel_gap", "origin")?;
        for (i, c) in self.lowest.iter().enumerate() {
            writeln!(
                w,
                "{:>4} {:>4} {:<15} {:<12} {:<10} {:>12.4e} {:<8}",
                i + 1,
                c.dim,
                format!("{:?}", c.class),
                c.function,
                c.norm,
                c.relative_gap,
                c.origin
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SearchConfig {
        SearchConfig {
            dims: vec![3],
            functions: vec!["power:0.5".into(), "power:1.5".into()],
            random_instances: 8,
            restarts: 2,
            steps: 10,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let mut a = search_counterexample(&tiny()).unwrap();
        let mut b = search_counterexample(&tiny()).unwrap();
        a.wall_time_ms = 0;
        b.wall_time_ms = 0;
        assert_eq!(a, b);
        assert!(a.lowest.len() <= KEEP_LOWEST);
        assert_eq!(a.iterations, 8 + 2 * 11);
    }

    #[test]
    fn zero_steps_reports_start() {
        let cfg = SearchConfig {
            random_instances: 0,
            restarts: 1,
            steps: 0,
            ..tiny()
        };
        let r = search_counterexample(&cfg).unwrap();
        let best = r.best.unwrap();
        let a = SymMatrix::from_rows(&best.a).unwrap();
        let b = SymMatrix::from_rows(&best.b).unwrap();
        let f: OperatorFunction = best.function.parse().unwrap();
        let g = crate::uinorm::conjecture_gap(&a, &b, &f, best.norm.parse().unwrap()).unwrap();
        assert_eq!(g.relative_gap, best.relative_gap);
    }

    #[test]
    fn identity_function_has_zero_gap() {
        let cfg = SearchConfig {
            functions: vec!["power:1".into()],
            ..tiny()
        };
        let r = search_counterexample(&cfg).unwrap();
        assert!(r.best_relative_gap.abs() < 1e-12, "{}", r.best_relative_gap);
        assert_eq!(r.verdict, SearchVerdict::NoViolationFound);
    }

    #[test]
    fn bad_config() {
        let cfg = SearchConfig { dims: vec![], ..tiny() };
        assert!(search_counterexample(&cfg).is_err());
        let cfg = SearchConfig {
            norms: vec!["kyfan:9".into()],
            ..tiny()
        };
        assert!(search_counterexample(&cfg).is_err());
    }
}
