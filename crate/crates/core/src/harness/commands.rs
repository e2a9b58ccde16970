//! The work behind each command-line subcommand.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::analysis::{
    convergence_study, emit_spectrum, output_name, pollution_study, spectrum_study, write_error_csv, ErrorMetric,
    SpectrumParams,
};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, Study};
use crate::harness::record::{emit_results, read_results, Format, RunRecord};
use crate::harness::reference::{compare_to_reference, load_reference, write_comparison_csv, Comparison};
use crate::harness::run::{problem_for, run_table};

/// Default dimension cap for dense spectra.
pub const SPECTRUM_CAP: usize = 4000;

#[derive(Debug, Default)]
pub struct Outcome {
    /// Human-readable report, one entry per line.
    pub lines: Vec<String>,
    pub written: Vec<PathBuf>,
    /// A golden table was compared and at least one cell failed.
    pub golden_failed: bool,
}

fn expect_study(cfg: &ExperimentConfig, allowed: &[Study]) -> Result<()> {
    if allowed.contains(&cfg.study) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("config '{}' describes a {:?} study, expected one of {allowed:?}", cfg.name, cfg.study)))
    }
}

/// Iteration counts as a text table: one row per `(preconditioner, p)`, one column per `k`.
pub fn render_table(records: &[RunRecord]) -> Vec<String> {
    let mut ks: Vec<f64> = records.iter().map(|r| r.k).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let mut rows: BTreeMap<(String, usize), BTreeMap<u64, String>> = BTreeMap::new();
    for r in records {
        rows.entry((r.preconditioner.clone(), r.p)).or_default().insert(r.k.to_bits(), r.cell());
    }
    let mut lines = vec![format!("{:<14} {:>2} {}", "preconditioner", "p", ks.iter().map(|k| format!("{:>8}", k)).collect::<String>())];
    for ((label, p), cells) in rows {
        let body: String = ks.iter().map(|k| format!("{:>8}", cells.get(&k.to_bits()).map_or("", String::as_str))).collect();
        lines.push(format!("{label:<14} {p:>2} {body}"));
    }
    lines
}

fn compare_lines(cmp: &Comparison) -> Vec<String> {
    let mut lines: Vec<String> = cmp
        .cells
        .iter()
        .filter(|c| c.verdict != crate::harness::reference::Verdict::Match)
        .map(|c| {
            format!(
                "  {:?}: {} p={} k={} expected {} got {} (tolerance {})",
                c.verdict, c.preconditioner, c.p, c.k, c.expected, c.got, c.tolerance
            )
        })
        .collect();
    lines.push(cmp.summary());
    lines
}

/// Runs the sweep, writes the records and, when the config names a golden
/// table, compares against it.
pub fn table(cfg: &ExperimentConfig, out: &Path, format: Format) -> Result<Outcome> {
    expect_study(cfg, &[Study::Iterations])?;
    let records = run_table(cfg);
    let mut outcome = Outcome { lines: render_table(&records), ..Outcome::default() };
    outcome.written.push(emit_results(out, &cfg.name, &records, format)?);
    if let Some(reference) = &cfg.reference {
        let cmp = compare_to_reference(&records, &load_reference(reference)?, cfg.tolerance)?;
        let path = out.join(format!("{}-comparison.csv", cfg.name));
        write_comparison_csv(&path, &cmp)?;
        outcome.written.push(path);
        outcome.lines.extend(compare_lines(&cmp));
        outcome.golden_failed = !cmp.passed();
    }
    Ok(outcome)
}

/// A single `(k, p)` cell for every configured preconditioner.
pub fn solve(cfg: &ExperimentConfig, out: Option<&Path>, format: Format) -> Result<Outcome> {
    let records = run_table(cfg);
    let mut outcome = Outcome::default();
    for r in &records {
        let mut line = format!(
            "{} {} k={} p={} n={}: {:?} after {} iterations (matvecs {}, coarse solves {}, V-cycles {})",
            r.problem, r.preconditioner, r.k, r.p, r.n, r.status, r.iterations, r.counts.matvecs, r.counts.coarse_solves, r.counts.vcycles
        );
        if let Some(d) = r.direct_difference {
            line.push_str(&format!(", direct-solve difference {d:.2e}"));
        }
        if let Some(e) = r.l2_error {
            line.push_str(&format!(", L2 error {e:.3e}"));
        }
        if let Some(m) = &r.message {
            line.push_str(&format!(" [{m}]"));
        }
        outcome.lines.push(line);
    }
    if let Some(dir) = out {
        outcome.written.push(emit_results(dir, &cfg.name, &records, format)?);
    }
    Ok(outcome)
}

/// Dense spectra for every `(k, p, section)` of a spectrum config.
pub fn spectrum(cfg: &ExperimentConfig, out: &Path, cap: usize) -> Result<Outcome> {
    expect_study(cfg, &[Study::Spectrum])?;
    std::fs::create_dir_all(out)?;
    let mut outcome = Outcome::default();
    for &k in &cfg.ks {
        let problem = problem_for(cfg, k)?;
        for &p in &cfg.ps {
            for pc in &cfg.preconditioners {
                let spec = pc.spec(k, p);
                let composition = pc.for_order(p).composition.expect("validated when parsed");
                let params = SpectrumParams {
                    k,
                    p,
                    n_elements: cfg.elements.first().copied().unwrap_or_else(|| cfg.elements_for(k, cfg.kh[0])),
                    beta2: spec.beta2,
                    epsilon: spec.deflation().map_or(spec.epsilon, |d| d.epsilon),
                    nu: spec.nu,
                    omega: spec.omega,
                };
                let data = spectrum_study(&problem, composition, params, cap)?;
                let slug = format!("{}-{}", problem.id, pc.label);
                let path = emit_spectrum(out, &slug, &data)?;
                outcome.lines.push(format!(
                    "{} k={k} p={p} {}: n={} near-zero={} min Re(other)={:.3e} -> {}",
                    pc.label,
                    composition,
                    data.eigenvalues.len(),
                    data.near_zero(1e-6),
                    data.min_real_part(1e-6).unwrap_or(f64::NAN),
                    path.display()
                ));
                outcome.written.push(path);
            }
        }
    }
    Ok(outcome)
}

/// Refinement studies (`study = convergence`) or fixed-`kh` pollution studies.
pub fn convergence(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    expect_study(cfg, &[Study::Convergence, Study::Pollution])?;
    std::fs::create_dir_all(out)?;
    let mut outcome = Outcome::default();
    let slug = cfg.problem.slug();
    if cfg.study == Study::Convergence {
        if cfg.elements.len() < 2 {
            return Err(Error::InvalidArgument("a convergence study needs at least two element counts".into()));
        }
        for &k in &cfg.ks {
            let problem = problem_for(cfg, k)?;
            for &p in &cfg.ps {
                let study = convergence_study(&problem, p, &cfg.elements, ErrorMetric::Quadrature)?;
                let sampled = study.refit(ErrorMetric::Sampled)?;
                let path = out.join(output_name("convergence", slug, p, k));
                write_error_csv(&path, &study.reports)?;
                let fmt = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.3}"));
                outcome.lines.push(format!(
                    "k={k} p={p}: slope {} (quadrature), {} (sampled) -> {}",
                    fmt(study.slope),
                    fmt(sampled.slope),
                    path.display()
                ));
                outcome.written.push(path);
            }
        }
    } else {
        problem_for(cfg, cfg.ks[0])?;
        let reports = pollution_study(|k| problem_for(cfg, k).expect("checked above"), &cfg.ps, &cfg.ks, &cfg.kh)?;
        for &kh in &cfg.kh {
            for &p in &cfg.ps {
                let rows: Vec<_> = reports
                    .iter()
                    .filter(|r| r.p == p && crate::problems::resolution_for(r.k, kh) == r.n_elements)
                    .cloned()
                    .collect();
                let path = out.join(format!("pollution_{slug}_p{p}_kh{kh}.csv"));
                write_error_csv(&path, &rows)?;
                let errs: Vec<String> = rows.iter().map(|r| format!("{:.3e}", r.sampled_error)).collect();
                outcome.lines.push(format!("kh={kh} p={p}: sampled errors {} -> {}", errs.join(" "), path.display()));
                outcome.written.push(path);
            }
        }
    }
    Ok(outcome)
}

/// Compares a results file against a golden table.
pub fn compare(results: &Path, reference: &Path, tolerance: u32, out: Option<&Path>) -> Result<Outcome> {
    let records = read_results(results)?;
    let cmp = compare_to_reference(&records, &load_reference(reference)?, tolerance)?;
    let mut outcome = Outcome { lines: compare_lines(&cmp), golden_failed: !cmp.passed(), ..Outcome::default() };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let stem = results.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
        let path = dir.join(format!("{stem}-comparison.csv"));
        write_comparison_csv(&path, &cmp)?;
        outcome.written.push(path);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_against_matching_and_mismatching_reference() {
        let dir = tempfile::tempdir().unwrap();
        let run = |reference: &str| {
            let ref_path = dir.path().join("ref.csv");
            std::fs::write(&ref_path, reference).unwrap();
            let mut cfg = ExperimentConfig::parse("name = t\nproblem = mp1b\nk = 20\np = 1\n[preconditioner C_ex]\nbeta2 = 1/k\n").unwrap();
            cfg.reference = Some(ref_path);
            table(&cfg, dir.path(), Format::Csv).unwrap()
        };
        let probe = run("preconditioner,p,k,iterations\nC_ex,1,20,*\n");
        assert!(probe.golden_failed);
        let records = read_results(&dir.path().join("t.csv")).unwrap();
        let n = records[0].iterations;
        let ok = run(&format!("preconditioner,p,k,iterations\nC_ex,1,20,{}\n", n + 1));
        assert!(!ok.golden_failed);
        let bad = run(&format!("preconditioner,p,k,iterations\nC_ex,1,20,{}\n", n + 5));
        assert!(bad.golden_failed);
        let again = compare(&dir.path().join("t.csv"), &dir.path().join("ref.csv"), 2, None).unwrap();
        assert!(again.golden_failed);
    }

    #[test]
    fn rendered_table_has_one_row_per_order() {
        use crate::harness::record::tests::sample;
        use crate::harness::record::RunStatus;
        let records = vec![
            sample("D", 1, 100.0, RunStatus::Converged, 9),
            sample("D", 1, 1000.0, RunStatus::NotConverged, 100),
            sample("D", 2, 100.0, RunStatus::Converged, 7),
        ];
        let lines = render_table(&records);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].trim_end().ends_with('*'));
    }

    #[test]
    fn convergence_and_spectrum_write_named_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::parse("study = convergence\nproblem = mp1a\nk = 1\np = 2\nelements = 8, 16\n").unwrap();
        let out = convergence(&cfg, dir.path()).unwrap();
        assert!(out.written[0].ends_with("convergence_mp1a_p2_k1.csv"));
        let cfg = ExperimentConfig::parse("study = spectrum\nproblem = mp1b\nk = 20\np = 2\n[preconditioner D_eps]\ncomposition = PA\n").unwrap();
        let out = spectrum(&cfg, dir.path(), 400).unwrap();
        assert!(out.written[0].ends_with("spectrum-PA_mp1b-D_eps_p2_k20.csv"));
        assert!(table(&cfg, dir.path(), Format::Csv).is_err());
    }
}
