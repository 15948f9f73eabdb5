//! Report types and their JSON, CSV and text renderings.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SuiteConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Text,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Text => "text",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::Parse(format!("unknown format `{other}` (json, csv, text)"))),
        }
    }
}

/// The trial with the lowest relative gap, kept for inspection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstInstance {
    pub trial: u64,
    /// Seed of the stream the pair was drawn from.
    pub seed: u64,
    pub params: String,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub relative_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckAggregate {
    pub name: String,
    pub function: String,
    pub dim: usize,
    pub trials: usize,
    pub min_gap: f64,
    pub mean_gap: f64,
    pub min_relative_gap: f64,
    pub violations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_instance: Option<WorstInstance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: String,
    pub seed: u64,
    pub config: SuiteConfig,
    pub checks: Vec<CheckAggregate>,
    pub wall_time_ms: u64,
}

impl SuiteReport {
    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    /// Aggregates whose check name is `name`.
    pub fn check(&self, name: &str) -> impl Iterator<Item = &CheckAggregate> + '_ {
        let name = name.to_string();
        self.checks.iter().filter(move |c| c.name == name)
    }
}

/// Anything [`emit_report`] can write.
pub trait Emit {
    fn write_json(&self, w: &mut dyn Write) -> Result<()>;
    fn write_csv(&self, w: &mut dyn Write) -> Result<()>;
    fn write_text(&self, w: &mut dyn Write) -> Result<()>;
}

pub fn emit_report<R: Emit + ?Sized>(report: &R, format: OutputFormat, dest: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Json => report.write_json(dest),
        OutputFormat::Csv => report.write_csv(dest),
        OutputFormat::Text => report.write_text(dest),
    }?;
    dest.flush()?;
    Ok(())
}

pub(crate) fn json_pretty<T: Serialize>(value: &T, w: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

#[derive(Serialize)]
struct CsvRow<'a> {
    name: &'a str,
    function: &'a str,
    dim: usize,
    trials: usize,
    min_gap: f64,
    mean_gap: f64,
    min_relative_gap: f64,
    violations: usize,
}

impl Emit for SuiteReport {
    fn write_json(&self, w: &mut dyn Write) -> Result<()> {
        json_pretty(self, w)
    }

    fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        if self.checks.is_empty() {
            out.write_record(["name", "function", "dim", "trials", "min_gap", "mean_gap", "min_relative_gap", "violations"])?;
        }
        for c in &self.checks {
            out.serialize(CsvRow {
                name: &c.name,
                function: &c.function,
                dim: c.dim,
                trials: c.trials,
                min_gap: c.min_gap,
                mean_gap: c.mean_gap,
                min_relative_gap: c.min_relative_gap,
                violations: c.violations,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    fn write_text(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "traceineq {} seed={} wall_time={}ms", self.version, self.seed, self.wall_time_ms)?;
        let fw = self.checks.iter().map(|c| c.function.len()).max().unwrap_or(8).max(8);
        writeln!(
            w,
            "{:<18} {:<fw$} {:>4} {:>7} {:>12} {:>12} {:>12} {:>5}",
            "check", "function", "dim", "trials", "min_gap", "mean_gap", "min_rel", "viol"
        )?;
        for c in &self.checks {
            writeln!(
                w,
                "{:<18} {:<fw$} {:>4} {:>7} {:>12.4e} {:>12.4e} {:>12.4e} {:>5}",
                c.name, c.function, c.dim, c.trials, c.min_gap, c.mean_gap, c.min_relative_gap, c.violations
            )?;
        }
        writeln!(w, "{} aggregates, {} violations", self.checks.len(), self.total_violations())?;
        Ok(())
    }
}
