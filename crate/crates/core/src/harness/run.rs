//! Sweeps over wave numbers, orders and preconditioners.

use std::time::Instant;

use rayon::prelude::*;

use crate::analysis::{l2_error, sampled_error, DEFAULT_SAMPLES};
use crate::assembly::{build_system, DiscreteSystem};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, PreconditionerConfig};
use crate::harness::record::{sort_records, RunRecord, RunStatus};
use crate::linalg::{relative_difference, sparse_lu_solve};
use crate::precond::{compose_spec, OperationCounts};
use crate::problems::{ModelProblem, ProblemId};

/// Systems up to this size are also solved directly to check the iterative answer.
pub const DIRECT_CHECK_MAX_N: usize = 10_000;

/// The model problem a config describes at wave number `k`.
pub fn problem_for(cfg: &ExperimentConfig, k: f64) -> Result<ModelProblem> {
    match cfg.problem {
        ProblemId::Mp1b => Ok(ModelProblem::mp1b(k, cfg.source.unwrap_or(0.5))),
        ProblemId::Mp2b => ModelProblem::mp2b(k, cfg.step_table),
        id => ModelProblem::build(id, k),
    }
}

/// Retained dimension of the system for `(k, p)` without assembling it.
pub fn predicted_dimension(cfg: &ExperimentConfig, p: usize, n_elements: usize) -> usize {
    let per_dim = match cfg.problem {
        ProblemId::Mp1a => n_elements + p - 1,
        _ => n_elements + p - 2,
    };
    per_dim.pow(cfg.problem.dim() as u32)
}

fn n_elements(cfg: &ExperimentConfig, k: f64) -> usize {
    cfg.elements.first().copied().unwrap_or_else(|| cfg.elements_for(k, cfg.kh[0]))
}

fn blank(cfg: &ExperimentConfig, pc: &PreconditionerConfig, k: f64, p: usize) -> RunRecord {
    let spec = pc.spec(k, p);
    let n_el = n_elements(cfg, k);
    RunRecord {
        config: cfg.name.clone(),
        config_hash: cfg.hash(),
        problem: cfg.problem,
        preconditioner: pc.label.clone(),
        tag: spec.tag,
        k,
        p,
        n_elements: n_el,
        n: predicted_dimension(cfg, p, n_el),
        epsilon: if spec.tag.uses_epsilon() { spec.epsilon } else { 0.0 },
        beta2: spec.beta2,
        cycles: spec.cycles,
        nu: spec.nu,
        omega: spec.omega,
        tol: cfg.tol,
        max_it: cfg.max_it,
        status: RunStatus::Failed,
        iterations: 0,
        counts: OperationCounts::default(),
        direct_difference: None,
        l2_error: None,
        sampled_error: None,
        wall_seconds: 0.0,
        residuals: Vec::new(),
        message: None,
    }
}

fn solve_into(sys: &DiscreteSystem, cfg: &ExperimentConfig, pc: &PreconditionerConfig, record: &mut RunRecord) -> Result<()> {
    let spec = pc.spec(record.k, record.p);
    let comp = compose_spec(&sys.a, &sys.k2_mass, &sys.grid_shape(), &spec)?;
    let out = comp.solve(&sys.rhs, cfg.tol, cfg.max_it)?;
    record.iterations = out.report.iterations;
    record.residuals = out.report.relative_residuals.clone();
    record.counts = out.counts;
    record.status = if out.report.converged { RunStatus::Converged } else { RunStatus::NotConverged };
    if record.converged() && sys.n() <= DIRECT_CHECK_MAX_N {
        let direct = sparse_lu_solve(&sys.a, &sys.rhs)?;
        record.direct_difference = Some(relative_difference(&out.solution, &direct));
    }
    if record.converged() && sys.space.dim() == 1 {
        if let Some(exact) = sys.problem.analytic() {
            let coeffs = sys.embed(&out.solution);
            record.l2_error = Some(l2_error(sys, &coeffs, &exact)?);
            record.sampled_error = Some(sampled_error(sys, &coeffs, &exact, DEFAULT_SAMPLES)?);
        }
    }
    Ok(())
}

/// Runs one `(k, p)` cell for every preconditioner, sharing the assembled system.
pub fn run_cell(cfg: &ExperimentConfig, k: f64, p: usize) -> Vec<RunRecord> {
    let mut records: Vec<RunRecord> = cfg.preconditioners.iter().map(|pc| blank(cfg, pc, k, p)).collect();
    let n = records.first().map_or(0, |r| r.n);
    if let Some(cap) = cfg.max_n.filter(|&cap| n > cap) {
        for r in &mut records {
            r.status = RunStatus::Skipped;
            r.message = Some(Error::CapExceeded { n, cap }.to_string());
        }
        return records;
    }
    let built = problem_for(cfg, k).and_then(|problem| build_system(&problem, records[0].n_elements, p));
    let sys = match built {
        Ok(sys) => sys,
        Err(e) => {
            for r in &mut records {
                r.message = Some(e.to_string());
            }
            return records;
        }
    };
    for (pc, record) in cfg.preconditioners.iter().zip(records.iter_mut()) {
        record.n = sys.n();
        let start = Instant::now();
        if let Err(e) = solve_into(&sys, cfg, pc, record) {
            record.status = RunStatus::Failed;
            record.message = Some(e.to_string());
        }
        record.wall_seconds = start.elapsed().as_secs_f64();
    }
    records
}

/// Full `k × p × preconditioner` sweep; failures are recorded and the sweep
/// continues. Records come back sorted by (preconditioner, p, k).
pub fn run_table(cfg: &ExperimentConfig) -> Vec<RunRecord> {
    let cells: Vec<(f64, usize)> = cfg.ks.iter().flat_map(|&k| cfg.ps.iter().map(move |&p| (k, p))).collect();
    let mut records: Vec<RunRecord> = cells.par_iter().flat_map_iter(|&(k, p)| run_cell(cfg, k, p)).collect();
    sort_records(&mut records);
    records
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn predicted_dimension_matches_assembly() {
        for (problem, k) in [("mp1a", 10.0), ("mp1b", 30.0), ("mp2a", 5.0), ("mp2b", 5.0)] {
            let cfg = config(&format!("problem = {problem}\nk = {k}\np = 1\n[preconditioner D]\n"));
            for p in 1..=3 {
                let n_el = cfg.elements_for(k, 0.625);
                let sys = build_system(&problem_for(&cfg, k).unwrap(), n_el, p).unwrap();
                assert_eq!(predicted_dimension(&cfg, p, n_el), sys.n(), "{problem} p={p}");
            }
        }
    }

    #[test]
    fn sweep_is_sorted_and_checked_against_direct_solves() {
        let cfg = config("problem = mp1b\nk = 40, 20\np = 2, 1\n[preconditioner D_eps]\n[preconditioner C_ex]\nbeta2 = 1/k\n");
        let records = run_table(&cfg);
        assert_eq!(records.len(), 8);
        let keys: Vec<_> = records.iter().map(|r| (r.preconditioner.as_str(), r.p, r.k)).collect();
        assert_eq!(keys[0], ("C_ex", 1, 20.0));
        assert_eq!(keys[7], ("D_eps", 2, 40.0));
        for r in &records {
            assert_eq!(r.status, RunStatus::Converged, "{r:?}");
            assert!(r.direct_difference.unwrap() < 1e-6);
            assert!(r.l2_error.is_some() && r.sampled_error.is_some());
            assert_eq!(r.residuals.len(), r.iterations);
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = config("problem = mp1b\nk = 60\np = 3\n[preconditioner DC_MG]\ncycles = 2\n");
        let a = run_table(&cfg);
        let b = run_table(&cfg);
        assert_eq!(a[0].iterations, b[0].iterations);
        assert_eq!(a[0].residuals, b[0].residuals);
    }

    #[test]
    fn oversized_cells_are_skipped() {
        let cfg = config("problem = mp1b\nk = 100\np = 1\nmax_n = 50\n[preconditioner D]\n");
        let records = run_table(&cfg);
        assert_eq!(records[0].status, RunStatus::Skipped);
    }

    #[test]
    fn non_convergence_is_marked() {
        let cfg = config("problem = mp1b\nk = 400\np = 1\nmax_it = 3\n[preconditioner D]\n");
        let records = run_table(&cfg);
        assert_eq!(records[0].status, RunStatus::NotConverged);
        assert_eq!(records[0].cell(), "*");
        assert_eq!(records[0].iterations, 3);
    }

    #[test]
    fn build_failures_are_recorded() {
        let cfg = config("problem = mp1b\nk = 40\np = 1\nsource = 2.0\n[preconditioner D]\n");
        let records = run_table(&cfg);
        assert_eq!(records[0].status, RunStatus::Failed);
        assert!(records[0].message.is_some());
    }
}
