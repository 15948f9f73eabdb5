use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use traceineq::funcat::{OperatorFunction, QuadratureSpec};
use traceineq::harness::{
    emit_report, evaluate_named, quadrature_check, run_suite, search_counterexample, split_list, OutputFormat,
    SearchConfig, SearchSampling, SearchVerdict, SuiteConfig,
};
use traceineq::ineq::{GapReport, Verdict, GAP_TOL};
use traceineq::sampler::SampleKind;
use traceineq::symla::SymMatrix;
use traceineq::uinorm::NormSpec;
use traceineq::{Error, Result};

const DEFAULT_VERIFY_SEED: u64 = 42;
const DEFAULT_SEARCH_SEED: u64 = 7;

#[derive(Parser)]
#[command(name = "traceineq", version, about = "Randomized checks of trace inequalities for operator functions")]
struct Cli {
    /// Master seed (falls back to TRACEINEQ_SEED).
    #[arg(long, global = true, env = "TRACEINEQ_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the inequality suite over random instances.
    Verify(VerifyArgs),
    /// Look for counterexamples to the Ky Fan norm conjecture.
    Search(SearchArgs),
    /// Evaluate one inequality on matrices read from files.
    Eval(EvalArgs),
    /// Compare closed forms with integral representations.
    Quadcheck(QuadArgs),
}

#[derive(Args)]
struct Output {
    #[arg(long, default_value = "text")]
    format: OutputFormat,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "2,4,8")]
    dims: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value = "all")]
    checks: String,
    #[arg(long, default_value = "all")]
    functions: String,
    #[arg(long, default_value_t = GAP_TOL)]
    tolerance: f64,
    /// Pair kind: wishart, ordered, commuting, projection, rank_deficient:r, spectrum:l1,l2,...
    #[arg(long, default_value = "wishart")]
    sample: SampleKind,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SearchArgs {
    /// Dimension, or a comma-separated list.
    #[arg(long, alias = "dims", default_value = "6")]
    dim: String,
    #[arg(long, default_value_t = 200)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    #[arg(long, default_value_t = 0.1)]
    step_scale: f64,
    /// Random instances evaluated before descent.
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    /// kyfan:all, or a list of kyfan:k / schatten:p / trace.
    #[arg(long, default_value = "kyfan:all")]
    norm: String,
    #[arg(long, default_value = "power:grid")]
    functions: String,
    /// mixed, strict or commuting.
    #[arg(long, default_value = "mixed")]
    sampling: SearchSampling,
    #[arg(long, default_value_t = GAP_TOL)]
    tolerance: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    ineq: String,
    #[arg(long = "A")]
    a: PathBuf,
    #[arg(long = "B")]
    b: PathBuf,
    #[arg(long)]
    function: Option<OperatorFunction>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    norm: Option<NormSpec>,
    #[arg(long, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct QuadArgs {
    #[arg(long)]
    function: OperatorFunction,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long, default_value_t = 1e-3)]
    lo: f64,
    #[arg(long, default_value_t = 1e3)]
    hi: f64,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_nodes: usize,
    #[arg(long, default_value = "text")]
    format: OutputFormat,
}

fn parse_dims(s: &str) -> Result<Vec<usize>> {
    split_list(s)
        .iter()
        .map(|d| {
            if let Some((lo, hi)) = d.split_once("..") {
                let lo: usize = lo.parse().map_err(|_| Error::Parse(format!("bad dimension range `{d}`")))?;
                let hi: usize = hi.parse().map_err(|_| Error::Parse(format!("bad dimension range `{d}`")))?;
                Ok((lo..=hi).collect())
            } else {
                d.parse().map(|x| vec![x]).map_err(|_| Error::Parse(format!("bad dimension `{d}`")))
            }
        })
        .collect::<Result<Vec<Vec<usize>>>>()
        .map(|v| v.concat())
}

fn with_output(out: &Output, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &out.out {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(path)?);
            body(&mut file)
        }
        None => body(&mut io::stdout().lock()),
    }
}

fn read_matrix(path: &Path) -> Result<SymMatrix> {
    fs::read_to_string(path)?.parse()
}

/// `Ok(true)` when something was violated.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify(v) => {
            let cfg = SuiteConfig {
                dims: parse_dims(&v.dims)?,
                trials: v.trials,
                functions: split_list(&v.functions),
                checks: split_list(&v.checks),
                tolerance: v.tolerance,
                seed: cli.seed.unwrap_or(DEFAULT_VERIFY_SEED),
                format: v.output.format,
                sample: v.sample,
            };
            let report = run_suite(&cfg)?;
            with_output(&v.output, |w| emit_report(&report, v.output.format, w))?;
            let violations = report.total_violations();
            if violations > 0 {
                log::warn!("{violations} violations");
            }
            Ok(violations > 0)
        }
        Command::Search(s) => {
            let cfg = SearchConfig {
                dims: parse_dims(&s.dim)?,
                functions: split_list(&s.functions),
                norms: split_list(&s.norm),
                random_instances: s.instances,
                restarts: s.restarts,
                steps: s.steps,
                step_scale: s.step_scale,
                tolerance: s.tolerance,
                seed: cli.seed.unwrap_or(DEFAULT_SEARCH_SEED),
                sampling: s.sampling,
                format: s.output.format,
            };
            let report = search_counterexample(&cfg)?;
            with_output(&s.output, |w| emit_report(&report, s.output.format, w))?;
            Ok(report.verdict == SearchVerdict::ViolationCandidate)
        }
        Command::Eval(e) => {
            let a = read_matrix(&e.a)?;
            let b = read_matrix(&e.b)?;
            let prm = traceineq::harness::EvalParams {
                function: e.function,
                p: e.p,
                q: e.q,
                s: e.s,
                theta: e.theta,
                norm: e.norm,
            };
            let reports = evaluate_named(&e.ineq, &a, &b, &prm)?;
            let mut out = io::stdout().lock();
            print_reports(&reports, e.format, &mut out)?;
            Ok(reports.iter().any(|r| r.verdict == Verdict::Violated))
        }
        Command::Quadcheck(q) => {
            let spec = QuadratureSpec::new(q.rel_tol, q.max_nodes)?;
            let points = quadrature_check(&q.function, q.lo, q.hi, q.points, &spec)?;
            let mut out = io::stdout().lock();
            match q.format {
                OutputFormat::Json => {
                    serde_json::to_writer_pretty(&mut out, &points)?;
                    writeln!(out)?;
                }
                OutputFormat::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    for p in &points {
                        w.serialize(p)?;
                    }
                    w.flush()?;
                }
                OutputFormat::Text => {
                    writeln!(out, "{:>12} {:>22} {:>22} {:>10}", "t", "closed_form", "representation", "rel_err")?;
                    for p in &points {
                        writeln!(
                            out,
                            "{:>12.4e} {:>22.15e} {:>22.15e} {:>10.2e}",
                            p.t, p.closed_form, p.representation, p.relative_error
                        )?;
                    }
                }
            }
            let worst = points.iter().map(|p| p.relative_error).fold(0.0, f64::max);
            log::info!("{}: worst relative error {worst:e}", q.function);
            Ok(worst > q.rel_tol)
        }
    }
}

fn print_reports(reports: &[GapReport], format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, reports)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in reports {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::Text => {
            for r in reports {
                writeln!(
                    out,
                    "{:<20} lhs={:.12e} rhs={:.12e} gap={:.6e} rel={:.6e} {:?}",
                    r.name, r.lhs, r.rhs, r.gap, r.relative_gap, r.verdict
                )?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
