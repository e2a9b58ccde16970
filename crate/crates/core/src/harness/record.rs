//! Per-run results and their CSV / JSON forms.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precond::{OperationCounts, PreconditionerTag};
use crate::problems::ProblemId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    /// `max_it` reached; printed as `*` in tables.
    NotConverged,
    Failed,
    /// Above the `max_n` cap; not run.
    Skipped,
}

/// One cell of a sweep together with the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: String,
    pub config_hash: String,
    pub problem: ProblemId,
    pub preconditioner: String,
    pub tag: PreconditionerTag,
    pub k: f64,
    pub p: usize,
    pub n_elements: usize,
    pub n: usize,
    pub epsilon: f64,
    pub beta2: f64,
    pub cycles: usize,
    pub nu: usize,
    pub omega: f64,
    pub tol: f64,
    pub max_it: usize,
    pub status: RunStatus,
    pub iterations: usize,
    pub counts: OperationCounts,
    /// Relative difference to a sparse direct solve, for small systems.
    pub direct_difference: Option<f64>,
    /// Discretization error of the iterative solution, where a closed form exists.
    pub l2_error: Option<f64>,
    /// The same error on uniform samples, 1D only.
    pub sampled_error: Option<f64>,
    /// Informational only.
    pub wall_seconds: f64,
    pub residuals: Vec<f64>,
    pub message: Option<String>,
}

impl RunRecord {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }

    /// Sort key: preconditioner label, then order, then wave number.
    pub fn key(&self) -> (String, usize, u64) {
        (self.preconditioner.clone(), self.p, self.k.to_bits())
    }

    /// Table cell text: the iteration count, `*` at the cap, `-` otherwise.
    pub fn cell(&self) -> String {
        match self.status {
            RunStatus::Converged => self.iterations.to_string(),
            RunStatus::NotConverged => "*".into(),
            RunStatus::Failed | RunStatus::Skipped => "-".into(),
        }
    }
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        a.preconditioner
            .cmp(&b.preconditioner)
            .then(a.p.cmp(&b.p))
            .then(a.k.total_cmp(&b.k))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format '{s}' (csv or json)"))),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .ok_or_else(|| Error::InvalidArgument(format!("cannot tell the format of {}", path.display())))?
            .parse()
    }
}

/// Flat CSV row; the residual history is `;`-separated.
#[derive(Debug, Serialize, Deserialize)]
struct Row {
    config: String,
    config_hash: String,
    problem: ProblemId,
    preconditioner: String,
    tag: PreconditionerTag,
    k: f64,
    p: usize,
    n_elements: usize,
    n: usize,
    epsilon: f64,
    beta2: f64,
    cycles: usize,
    nu: usize,
    omega: f64,
    tol: f64,
    max_it: usize,
    status: RunStatus,
    iterations: usize,
    matvecs: usize,
    coarse_solves: usize,
    cslp_applications: usize,
    vcycles: usize,
    direct_difference: Option<f64>,
    l2_error: Option<f64>,
    sampled_error: Option<f64>,
    wall_seconds: f64,
    residuals: String,
    message: Option<String>,
}

pub const CSV_HEADER: [&str; 28] = [
    "config",
    "config_hash",
    "problem",
    "preconditioner",
    "tag",
    "k",
    "p",
    "n_elements",
    "n",
    "epsilon",
    "beta2",
    "cycles",
    "nu",
    "omega",
    "tol",
    "max_it",
    "status",
    "iterations",
    "matvecs",
    "coarse_solves",
    "cslp_applications",
    "vcycles",
    "direct_difference",
    "l2_error",
    "sampled_error",
    "wall_seconds",
    "residuals",
    "message",
];

impl From<&RunRecord> for Row {
    fn from(r: &RunRecord) -> Self {
        Row {
            config: r.config.clone(),
            config_hash: r.config_hash.clone(),
            problem: r.problem,
            preconditioner: r.preconditioner.clone(),
            tag: r.tag,
            k: r.k,
            p: r.p,
            n_elements: r.n_elements,
            n: r.n,
            epsilon: r.epsilon,
            beta2: r.beta2,
            cycles: r.cycles,
            nu: r.nu,
            omega: r.omega,
            tol: r.tol,
            max_it: r.max_it,
            status: r.status,
            iterations: r.iterations,
            matvecs: r.counts.matvecs,
            coarse_solves: r.counts.coarse_solves,
            cslp_applications: r.counts.cslp_applications,
            vcycles: r.counts.vcycles,
            direct_difference: r.direct_difference,
            l2_error: r.l2_error,
            sampled_error: r.sampled_error,
            wall_seconds: r.wall_seconds,
            residuals: r.residuals.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
            message: r.message.clone(),
        }
    }
}

impl TryFrom<Row> for RunRecord {
    type Error = Error;

    fn try_from(r: Row) -> Result<Self> {
        let residuals = if r.residuals.is_empty() {
            Vec::new()
        } else {
            r.residuals
                .split(';')
                .map(|s| s.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad residual '{s}'"))))
                .collect::<Result<_>>()?
        };
        Ok(RunRecord {
            config: r.config,
            config_hash: r.config_hash,
            problem: r.problem,
            preconditioner: r.preconditioner,
            tag: r.tag,
            k: r.k,
            p: r.p,
            n_elements: r.n_elements,
            n: r.n,
            epsilon: r.epsilon,
            beta2: r.beta2,
            cycles: r.cycles,
            nu: r.nu,
            omega: r.omega,
            tol: r.tol,
            max_it: r.max_it,
            status: r.status,
            iterations: r.iterations,
            counts: OperationCounts {
                matvecs: r.matvecs,
                coarse_solves: r.coarse_solves,
                cslp_applications: r.cslp_applications,
                vcycles: r.vcycles,
            },
            direct_difference: r.direct_difference,
            l2_error: r.l2_error,
            sampled_error: r.sampled_error,
            wall_seconds: r.wall_seconds,
            residuals,
            message: r.message,
        })
    }
}

pub fn records_to_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(Row::from(r))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn records_from_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize::<Row>().map(|row| RunRecord::try_from(row?)).collect()
}

pub fn records_to_json(records: &[RunRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(records)?)
}

pub fn records_from_json(text: &str) -> Result<Vec<RunRecord>> {
    Ok(serde_json::from_str(text)?)
}

/// Writes `records` (sorted) to `dir/<name>.<ext>` and returns the path.
pub fn emit_results(dir: &Path, name: &str, records: &[RunRecord], format: Format) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let text = match format {
        Format::Csv => records_to_csv(&sorted)?,
        Format::Json => records_to_json(&sorted)?,
    };
    let path = dir.join(format!("{name}.{}", format.extension()));
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn read_results(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path)?;
    match Format::from_path(path)? {
        Format::Csv => records_from_csv(&text),
        Format::Json => records_from_json(&text),
    }
}
