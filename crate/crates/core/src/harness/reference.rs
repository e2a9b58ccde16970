//! Golden iteration tables and the comparison against a sweep.
//!
//! A reference file is CSV with columns `preconditioner,p,k,iterations` and an
//! optional `tolerance` column overriding the default per cell. `*` in the
//! iteration column means the reference run hit the iteration cap.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::record::{RunRecord, RunStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefValue {
    Iterations(usize),
    NotConverged,
}

impl fmt::Display for RefValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefValue::Iterations(n) => write!(f, "{n}"),
            RefValue::NotConverged => f.write_str("*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCell {
    pub preconditioner: String,
    pub p: usize,
    pub k: f64,
    pub expected: RefValue,
    pub tolerance: Option<u32>,
}

#[derive(Debug, Deserialize)]
struct RawCell {
    preconditioner: String,
    p: usize,
    k: f64,
    iterations: String,
    #[serde(default)]
    tolerance: Option<u32>,
}

pub fn parse_reference(text: &str) -> Result<Vec<ReferenceCell>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    reader
        .deserialize::<RawCell>()
        .map(|row| {
            let row = row?;
            let expected = match row.iterations.as_str() {
                "*" => RefValue::NotConverged,
                s => RefValue::Iterations(
                    s.parse().map_err(|_| Error::InvalidArgument(format!("bad reference iteration count '{s}'")))?,
                ),
            };
            Ok(ReferenceCell { preconditioner: row.preconditioner, p: row.p, k: row.k, expected, tolerance: row.tolerance })
        })
        .collect()
}

pub fn load_reference(path: &Path) -> Result<Vec<ReferenceCell>> {
    parse_reference(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Match,
    /// Within tolerance but not equal.
    Warn,
    /// Cell not run (above the size cap).
    Skipped,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDiff {
    pub preconditioner: String,
    pub p: usize,
    pub k: f64,
    pub expected: RefValue,
    pub got: String,
    pub delta: Option<i64>,
    pub tolerance: u32,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub cells: Vec<CellDiff>,
    /// Records with no reference cell.
    pub unreferenced: usize,
}

impl Comparison {
    pub fn count(&self, v: Verdict) -> usize {
        self.cells.iter().filter(|c| c.verdict == v).count()
    }

    pub fn passed(&self) -> bool {
        self.count(Verdict::Fail) == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{} cells: {} match, {} within tolerance, {} skipped, {} fail",
            self.cells.len(),
            self.count(Verdict::Match),
            self.count(Verdict::Warn),
            self.count(Verdict::Skipped),
            self.count(Verdict::Fail)
        )
    }
}

fn same_k(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn judge(record: &RunRecord, expected: RefValue, tolerance: u32) -> (Option<i64>, Verdict) {
    match (record.status, expected) {
        (RunStatus::Skipped, _) => (None, Verdict::Skipped),
        (RunStatus::Failed, _) => (None, Verdict::Fail),
        (RunStatus::NotConverged, RefValue::NotConverged) => (None, Verdict::Match),
        (RunStatus::NotConverged, RefValue::Iterations(_)) | (RunStatus::Converged, RefValue::NotConverged) => {
            (None, Verdict::Fail)
        }
        (RunStatus::Converged, RefValue::Iterations(n)) => {
            let delta = record.iterations as i64 - n as i64;
            let verdict = match delta.unsigned_abs() {
                0 => Verdict::Match,
                d if d <= u64::from(tolerance) => Verdict::Warn,
                _ => Verdict::Fail,
            };
            (Some(delta), verdict)
        }
    }
}

/// Cell-by-cell comparison. Every reference cell must have a matching record,
/// otherwise the sweep and the table have different shapes.
pub fn compare_to_reference(records: &[RunRecord], reference: &[ReferenceCell], default_tolerance: u32) -> Result<Comparison> {
    let mut used = vec![false; records.len()];
    let mut cells = Vec::with_capacity(reference.len());
    for cell in reference {
        let idx = records
            .iter()
            .position(|r| r.preconditioner == cell.preconditioner && r.p == cell.p && same_k(r.k, cell.k))
            .ok_or_else(|| {
                Error::ShapeMismatch(format!("no run for {} at p = {}, k = {}", cell.preconditioner, cell.p, cell.k))
            })?;
        used[idx] = true;
        let record = &records[idx];
        let tolerance = cell.tolerance.unwrap_or(default_tolerance);
        let (delta, verdict) = judge(record, cell.expected, tolerance);
        cells.push(CellDiff {
            preconditioner: cell.preconditioner.clone(),
            p: cell.p,
            k: cell.k,
            expected: cell.expected,
            got: record.cell(),
            delta,
            tolerance,
            verdict,
        });
    }
    Ok(Comparison { cells, unreferenced: used.iter().filter(|u| !**u).count() })
}

pub fn write_comparison_csv(path: &Path, cmp: &Comparison) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["preconditioner", "p", "k", "expected", "got", "delta", "tolerance", "verdict"])?;
    for c in &cmp.cells {
        w.write_record([
            c.preconditioner.clone(),
            c.p.to_string(),
            c.k.to_string(),
            c.expected.to_string(),
            c.got.clone(),
            c.delta.map(|d| d.to_string()).unwrap_or_default(),
            c.tolerance.to_string(),
            format!("{:?}", c.verdict).to_lowercase(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::record::tests::sample;

    const TABLE: &str = "\
# digitized
preconditioner,p,k,iterations,tolerance
D,1,100,9,
D,1,1000000,*,
C_ex,1,100,5,0
";

    fn runs() -> Vec<RunRecord> {
        vec![
            sample("D", 1, 100.0, RunStatus::Converged, 9),
            sample("D", 1, 1e6, RunStatus::NotConverged, 100),
            sample("C_ex", 1, 100.0, RunStatus::Converged, 5),
        ]
    }

    #[test]
    fn parses_stars_and_tolerances() {
        let cells = parse_reference(TABLE).unwrap();
        assert_eq!(cells.len(), 3);
        assert_eq!(cells[1].expected, RefValue::NotConverged);
        assert_eq!(cells[0].tolerance, None);
        assert_eq!(cells[2].tolerance, Some(0));
        assert!(parse_reference("preconditioner,p,k,iterations\nD,1,1,x\n").is_err());
    }

    #[test]
    fn identical_tables_have_zero_diff() {
        let cmp = compare_to_reference(&runs(), &parse_reference(TABLE).unwrap(), 2).unwrap();
        assert_eq!(cmp.count(Verdict::Match), 3);
        assert!(cmp.passed());
        assert!(cmp.cells.iter().all(|c| c.delta.unwrap_or(0) == 0));
    }

    #[test]
    fn off_by_one_within_tolerance_warns() {
        let mut r = runs();
        r[0].iterations = 10;
        let cmp = compare_to_reference(&r, &parse_reference(TABLE).unwrap(), 2).unwrap();
        assert_eq!(cmp.cells[0].verdict, Verdict::Warn);
        assert_eq!(cmp.cells[0].delta, Some(1));
        assert!(cmp.passed());
    }

    #[test]
    fn per_cell_tolerance_overrides_default() {
        let mut r = runs();
        r[2].iterations = 6;
        let cmp = compare_to_reference(&r, &parse_reference(TABLE).unwrap(), 2).unwrap();
        assert_eq!(cmp.cells[2].verdict, Verdict::Fail);
    }

    #[test]
    fn star_against_converged_run_is_hard_mismatch() {
        let mut r = runs();
        r[1].status = RunStatus::Converged;
        r[1].iterations = 30;
        let cmp = compare_to_reference(&r, &parse_reference(TABLE).unwrap(), 50).unwrap();
        assert_eq!(cmp.cells[1].verdict, Verdict::Fail);
        assert!(!cmp.passed());
    }

    #[test]
    fn skipped_cells_do_not_fail() {
        let mut r = runs();
        r[1].status = RunStatus::Skipped;
        let cmp = compare_to_reference(&r, &parse_reference(TABLE).unwrap(), 2).unwrap();
        assert_eq!(cmp.cells[1].verdict, Verdict::Skipped);
        assert!(cmp.passed());
    }

    #[test]
    fn missing_run_is_shape_mismatch() {
        let r = runs()[..2].to_vec();
        let err = compare_to_reference(&r, &parse_reference(TABLE).unwrap(), 2).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }
}
