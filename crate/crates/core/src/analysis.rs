//! Discretization error, convergence and pollution studies, and spectra of the
//! preconditioned operators.
//!
//! Two error measures are reported. `l2_error` is the quadrature norm
//! `√∫|u_h - u|²`. `sampled_error` is `‖e(x_i)‖₂ / s` over `s` uniform samples
//! of `[0, 1]`; it is the measure published reference values are quoted in,
//! and it decays at the same rate.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{build_system, DiscreteSystem};
use crate::error::{Error, Result};
use crate::linalg::{dense_eigenvalues, sparse_lu_solve, FnOperator, LinearOperator};
use crate::precond::cslp::shifted_matrix;
use crate::precond::{build_cslp, build_deflation, two_grid_proxy, CslpSpec, DeflationSpec, Inversion};
use crate::problems::{resolution_for, AnalyticSolution, ModelProblem};
use crate::spline::{BasisTable, GaussRule};
use crate::C64;

pub const DEFAULT_SAMPLES: usize = 1000;

/// Errors below this are round-off and are left out of slope fits.
pub const PLATEAU_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub k: f64,
    pub p: usize,
    pub n_elements: usize,
    pub kh: f64,
    pub dof_count: usize,
    pub l2_error: f64,
    pub sampled_error: f64,
}

/// Solves the discrete system directly and returns the coefficients on the full space.
pub fn solve_direct(sys: &DiscreteSystem) -> Result<Vec<C64>> {
    let u = sparse_lu_solve(&sys.a, &sys.rhs)?;
    Ok(sys.embed(&u))
}

fn element_excluded(e: usize, h: f64, t: f64) -> bool {
    let (a, b) = (e as f64 * h, (e + 1) as f64 * h);
    t >= a - 1e-12 && t <= b + 1e-12
}

/// Quadrature L2 error of the full coefficient vector `coeffs` with
/// `points` Gauss points per element and direction. Elements touching the
/// singular point of `exact` are skipped.
pub fn l2_error_with_rule(sys: &DiscreteSystem, coeffs: &[C64], exact: &AnalyticSolution, points: usize) -> Result<f64> {
    let space = &sys.space;
    if coeffs.len() != space.n_dof() {
        return Err(Error::SizeMismatch { expected: space.n_dof(), got: coeffs.len() });
    }
    let singular = exact.singular_point();
    let tables: Vec<BasisTable> = space.knots_per_dim().iter().map(|kv| BasisTable::new(kv, GaussRule::new(points))).collect();
    let kx = space.knots(0);
    let h = kx.span_width();
    let n_el = kx.n_elements();
    let nx = kx.n_basis();

    let element_sum = |ex: usize, ey: Option<usize>| -> Result<f64> {
        if let Some((xs, ys)) = singular {
            let hit_x = element_excluded(ex, h, xs);
            let hit_y = ey.is_none_or(|ey| element_excluded(ey, space.knots(1).span_width(), ys));
            if hit_x && hit_y {
                return Ok(0.0);
            }
        }
        let bx = tables[0].element(ex);
        let mut sum = 0.0;
        match ey {
            None => {
                for (q, (&x, &w)) in bx.points.iter().zip(&bx.weights).enumerate() {
                    let uh: C64 = bx.local_values[q].iter().enumerate().map(|(a, &v)| coeffs[bx.first_index + a] * v).sum();
                    sum += w * (uh - exact.eval(x, 0.0)?).norm_sqr();
                }
            }
            Some(ey) => {
                let by = tables[1].element(ey);
                for (qy, (&y, &wy)) in by.points.iter().zip(&by.weights).enumerate() {
                    for (qx, (&x, &wx)) in bx.points.iter().zip(&bx.weights).enumerate() {
                        let mut uh = C64::new(0.0, 0.0);
                        for (b, &vy) in by.local_values[qy].iter().enumerate() {
                            let row = (by.first_index + b) * nx;
                            for (a, &vx) in bx.local_values[qx].iter().enumerate() {
                                uh += coeffs[row + bx.first_index + a] * (vx * vy);
                            }
                        }
                        sum += wx * wy * (uh - exact.eval(x, y)?).norm_sqr();
                    }
                }
            }
        }
        Ok(sum)
    };

    let total: Result<Vec<f64>> = if space.dim() == 1 {
        (0..n_el).into_par_iter().map(|e| element_sum(e, None)).collect()
    } else {
        let n_el_y = space.knots(1).n_elements();
        (0..n_el * n_el_y).into_par_iter().map(|g| element_sum(g % n_el, Some(g / n_el))).collect()
    };
    Ok(total?.iter().sum::<f64>().sqrt())
}

/// Quadrature L2 error with `2(p + 1)` points per element. The assembly rule
/// alone sits close to the points where the Galerkin error is superconvergent
/// and underestimates the norm by up to 15%.
pub fn l2_error(sys: &DiscreteSystem, coeffs: &[C64], exact: &AnalyticSolution) -> Result<f64> {
    l2_error_with_rule(sys, coeffs, exact, 2 * (sys.space.degree() + 1))
}

/// `‖u_h(x_i) - u(x_i)‖₂ / samples` on `samples` uniform points of `[0, 1]` (1D only).
pub fn sampled_error(sys: &DiscreteSystem, coeffs: &[C64], exact: &AnalyticSolution, samples: usize) -> Result<f64> {
    if sys.space.dim() != 1 {
        return Err(Error::InvalidArgument("sampled error is defined for 1D problems".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let mut sum = 0.0;
    for i in 0..samples {
        let x = i as f64 / (samples - 1) as f64;
        sum += (sys.evaluate(coeffs, x, 0.0)? - exact.eval(x, 0.0)?).norm_sqr();
    }
    Ok(sum.sqrt() / samples as f64)
}

/// Direct solve plus both error measures for one discretization.
pub fn error_report(problem: &ModelProblem, n_elements: usize, p: usize) -> Result<ErrorReport> {
    let exact = problem
        .analytic()
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no closed-form solution", problem.id)))?;
    let sys = build_system(problem, n_elements, p)?;
    let coeffs = solve_direct(&sys)?;
    let sampled = if problem.dim() == 1 { sampled_error(&sys, &coeffs, &exact, DEFAULT_SAMPLES)? } else { f64::NAN };
    let k = problem.wave.base_k();
    Ok(ErrorReport {
        k,
        p,
        n_elements,
        kh: k / n_elements as f64,
        dof_count: sys.n(),
        l2_error: l2_error(&sys, &coeffs, &exact)?,
        sampled_error: sampled,
    })
}

/// Which error measure a slope is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorMetric {
    Quadrature,
    Sampled,
}

impl ErrorMetric {
    pub fn of(self, r: &ErrorReport) -> f64 {
        match self {
            ErrorMetric::Quadrature => r.l2_error,
            ErrorMetric::Sampled => r.sampled_error,
        }
    }
}

/// Indices of refinement levels that enter the slope fit. A level is dropped
/// once the error is at round-off or stops halving under refinement; every
/// finer level is dropped with it.
pub fn fit_levels(errors: &[f64]) -> Vec<usize> {
    let mut kept = Vec::new();
    for (i, &e) in errors.iter().enumerate() {
        let stalled = i > 0 && errors[i - 1] / e < 2.0;
        if e < PLATEAU_FLOOR || !e.is_finite() || stalled {
            break;
        }
        kept.push(i);
    }
    kept
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("a slope needs at least two points".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub reports: Vec<ErrorReport>,
    pub metric: ErrorMetric,
    /// Levels used by the fit.
    pub fitted: Vec<usize>,
    /// Slope of the error against `h`; `None` when fewer than two levels survive.
    pub slope: Option<f64>,
}

impl ConvergenceStudy {
    /// Fits `reports` against `h` on the given metric.
    pub fn fit(reports: Vec<ErrorReport>, metric: ErrorMetric) -> Result<Self> {
        let errors: Vec<f64> = reports.iter().map(|r| metric.of(r)).collect();
        let fitted = fit_levels(&errors);
        let slope = if fitted.len() >= 2 {
            let h: Vec<f64> = fitted.iter().map(|&i| 1.0 / reports[i].n_elements as f64).collect();
            let e: Vec<f64> = fitted.iter().map(|&i| errors[i]).collect();
            Some(loglog_slope(&h, &e)?)
        } else {
            None
        };
        Ok(Self { reports, metric, fitted, slope })
    }

    /// The same reports fitted on another metric.
    pub fn refit(&self, metric: ErrorMetric) -> Result<Self> {
        Self::fit(self.reports.clone(), metric)
    }
}

/// Error under uniform refinement for a fixed problem and order.
pub fn convergence_study(problem: &ModelProblem, p: usize, element_counts: &[usize], metric: ErrorMetric) -> Result<ConvergenceStudy> {
    let reports: Vec<ErrorReport> =
        element_counts.par_iter().map(|&n| error_report(problem, n, p)).collect::<Result<_>>()?;
    ConvergenceStudy::fit(reports, metric)
}

/// Error against `k` at fixed `kh` for every `(p, k, kh)` combination,
/// sorted by `(kh, p, k)`.
pub fn pollution_study(build: impl Fn(f64) -> ModelProblem + Sync, ps: &[usize], ks: &[f64], kh_targets: &[f64]) -> Result<Vec<ErrorReport>> {
    let cells: Vec<(f64, usize, f64)> =
        kh_targets.iter().flat_map(|&kh| ps.iter().flat_map(move |&p| ks.iter().map(move |&k| (kh, p, k)))).collect();
    cells
        .par_iter()
        .map(|&(kh, p, k)| error_report(&build(k), resolution_for(k, kh), p))
        .collect()
}

/// Operator whose spectrum is studied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Composition {
    /// `P A`.
    Deflated,
    /// `Pᵀ M̃⁻¹ A` with the two-grid proxy `M̃⁻¹`.
    DeflatedProxy,
    /// `M̃⁻¹ P A`, the operator the solver iterates with.
    ProxyDeflated,
    /// `M⁻¹ A` with `M` inverted exactly.
    Shifted,
}

impl Composition {
    pub const ALL: [Composition; 4] =
        [Composition::Deflated, Composition::DeflatedProxy, Composition::ProxyDeflated, Composition::Shifted];

    pub fn label(self) -> &'static str {
        match self {
            Composition::Deflated => "PA",
            Composition::DeflatedProxy => "PtMA",
            Composition::ProxyDeflated => "MPA",
            Composition::Shifted => "MA",
        }
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Composition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Composition::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown composition '{s}' (expected PA, PtMA, MPA or MA)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    pub k: f64,
    pub p: usize,
    pub n_elements: usize,
    pub beta2: f64,
    pub epsilon: f64,
    pub nu: usize,
    pub omega: f64,
}

impl SpectrumParams {
    pub fn new(k: f64, p: usize) -> Self {
        Self {
            k,
            p,
            n_elements: resolution_for(k, 0.625),
            beta2: 1.0,
            epsilon: crate::precond::DEFAULT_EPSILON,
            nu: 1,
            omega: 0.6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumDataset {
    pub composition: Composition,
    pub params: SpectrumParams,
    /// `‖A‖₁`, the scale for "zero" eigenvalues.
    pub a_norm: f64,
    pub eigenvalues: Vec<C64>,
}

impl SpectrumDataset {
    /// Eigenvalues with modulus below `rel · ‖A‖₁`.
    pub fn near_zero(&self, rel: f64) -> usize {
        self.eigenvalues.iter().filter(|l| l.norm() < rel * self.a_norm).count()
    }

    /// Smallest real part among eigenvalues that are not near zero.
    pub fn min_real_part(&self, rel: f64) -> Option<f64> {
        self.eigenvalues.iter().filter(|l| l.norm() >= rel * self.a_norm).map(|l| l.re).reduce(f64::min)
    }
}

/// Full spectrum of the chosen composition for `problem`; `cap` bounds the dimension.
pub fn spectrum_study(problem: &ModelProblem, composition: Composition, params: SpectrumParams, cap: usize) -> Result<SpectrumDataset> {
    let sys = build_system(problem, params.n_elements, params.p)?;
    let n = sys.n();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let shape = sys.grid_shape();
    let a = &sys.a;
    let eigenvalues = match composition {
        Composition::Deflated => {
            let d = build_deflation(a, &shape, DeflationSpec { epsilon: params.epsilon })?;
            let op = FnOperator::new(n, "PA", |v: &[C64]| d.apply_deflated(v).expect("factorized coarse solve"));
            dense_eigenvalues(&op, cap)?
        }
        Composition::DeflatedProxy | Composition::ProxyDeflated => {
            let d = build_deflation(a, &shape, DeflationSpec { epsilon: params.epsilon })?;
            let m = shifted_matrix(a, &sys.k2_mass, params.beta2)?;
            let proxy = two_grid_proxy(&m, &shape, params.nu, params.omega)?;
            let op: Box<dyn LinearOperator> = if composition == Composition::DeflatedProxy {
                Box::new(FnOperator::new(n, "PtMA", |v: &[C64]| {
                    let w = proxy.apply_inverse(&a.mul_vec(v)).expect("two-grid cycle");
                    d.apply_pt(&w).expect("factorized coarse solve")
                }))
            } else {
                Box::new(FnOperator::new(n, "MPA", |v: &[C64]| {
                    let w = d.apply_deflated(v).expect("factorized coarse solve");
                    proxy.apply_inverse(&w).expect("two-grid cycle")
                }))
            };
            dense_eigenvalues(op.as_ref(), cap)?
        }
        Composition::Shifted => {
            let c = build_cslp(a, &sys.k2_mass, &shape, CslpSpec { beta2: params.beta2, inversion: Inversion::Exact })?;
            let op = FnOperator::new(n, "MA", |v: &[C64]| c.apply(&a.mul_vec(v)).expect("factorized shifted solve"));
            dense_eigenvalues(&op, cap)?
        }
    };
    Ok(SpectrumDataset { composition, params, a_norm: a.norm_one(), eigenvalues })
}

/// `<study>_<problem>_p<p>_k<k>.csv`.
pub fn output_name(study: &str, problem: &str, p: usize, k: f64) -> String {
    format!("{study}_{problem}_p{p}_k{k}.csv")
}

pub fn write_error_csv(path: &Path, reports: &[ErrorReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "p", "kh", "n_dof", "l2_error", "n_elements", "sampled_error"])?;
    for r in reports {
        w.write_record([
            r.k.to_string(),
            r.p.to_string(),
            r.kh.to_string(),
            r.dof_count.to_string(),
            format!("{:e}", r.l2_error),
            r.n_elements.to_string(),
            format!("{:e}", r.sampled_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv(path: &Path, eigenvalues: &[C64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["re", "im"])?;
    for l in eigenvalues {
        w.write_record([format!("{:e}", l.re), format!("{:e}", l.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectrum_csv(path: &Path) -> Result<Vec<C64>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize::<(f64, f64)>().map(|row| Ok(row.map(|(re, im)| C64::new(re, im))?)).collect()
}

/// Writes one spectrum into `dir` under the standard name and returns its path.
pub fn emit_spectrum(dir: &Path, problem: &str, data: &SpectrumDataset) -> Result<PathBuf> {
    let study = format!("spectrum-{}", data.composition.label());
    let path = dir.join(output_name(&study, problem, data.params.p, data.params.k));
    write_spectrum_csv(&path, &data.eigenvalues)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{exact_mp1a, BoundaryCondition, ProblemId, WaveNumberField};
    use crate::spline::tests::adaptive_simpson;

    #[test]
    fn spline_representable_solution_has_zero_error() {
        // k = 0 with u(0) = 1 and an absorbing right end reduces to u'' = 0,
        // u(0) = 1, u'(1) = 0, whose solution is the constant 1.
        let problem = ModelProblem {
            id: ProblemId::Mp1a,
            wave: WaveNumberField::constant(0.0),
            source: None,
            bc: vec![BoundaryCondition::DirichletOne, BoundaryCondition::Robin],
        };
        let sys = build_system(&problem, 8, 2).unwrap();
        let coeffs = solve_direct(&sys).unwrap();
        let exact = AnalyticSolution::PlaneWave { k: 0.0 };
        assert!(l2_error(&sys, &coeffs, &exact).unwrap() < 1e-12);
    }

    #[test]
    fn quadrature_error_matches_adaptive_integral() {
        let problem = ModelProblem::mp1a(3.0);
        let sys = build_system(&problem, 6, 2).unwrap();
        let coeffs = solve_direct(&sys).unwrap();
        let exact = problem.analytic().unwrap();
        let got = l2_error(&sys, &coeffs, &exact).unwrap();
        let integrand = |x: f64| (sys.evaluate(&coeffs, x, 0.0).unwrap() - exact_mp1a(x, 3.0)).norm_sqr();
        let mut oracle = 0.0;
        for e in 0..6 {
            oracle += adaptive_simpson(&integrand, e as f64 / 6.0, (e + 1) as f64 / 6.0, 1e-16);
        }
        assert!((got - oracle.sqrt()).abs() < 1e-3 * got, "{got} vs {}", oracle.sqrt());
    }

    #[test]
    fn richer_quadrature_barely_changes_error() {
        let problem = ModelProblem::mp1a(1.0);
        for p in 1..=4 {
            let sys = build_system(&problem, 16, p).unwrap();
            let coeffs = solve_direct(&sys).unwrap();
            let exact = problem.analytic().unwrap();
            let base = l2_error(&sys, &coeffs, &exact).unwrap();
            let doubled = l2_error_with_rule(&sys, &coeffs, &exact, 4 * (p + 1)).unwrap();
            assert!((base - doubled).abs() < 1e-3 * doubled, "p={p}: {base} vs {doubled}");
        }
    }

    #[test]
    fn source_element_is_excluded() {
        assert!(element_excluded(3, 0.125, 0.4));
        assert!(element_excluded(3, 0.125, 0.5));
        assert!(element_excluded(4, 0.125, 0.5));
        assert!(!element_excluded(5, 0.125, 0.5));
    }

    #[test]
    fn slope_of_power_law() {
        let h = [0.5, 0.25, 0.125];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(4)).collect();
        assert!((loglog_slope(&h, &e).unwrap() - 4.0).abs() < 1e-12);
        assert!(loglog_slope(&h[..1], &e[..1]).is_err());
    }

    #[test]
    fn plateau_levels_are_dropped() {
        assert_eq!(fit_levels(&[1e-3, 1e-5, 1e-7]), vec![0, 1, 2]);
        assert_eq!(fit_levels(&[1e-10, 1e-13, 5e-15]), vec![0, 1]);
        assert_eq!(fit_levels(&[1e-10, 1e-13, 8e-14, 2e-14]), vec![0, 1]);
    }

    #[test]
    fn quadratic_splines_converge_at_third_order() {
        let study = convergence_study(&ModelProblem::mp1a(1.0), 2, &[8, 16, 32], ErrorMetric::Quadrature).unwrap();
        let slope = study.slope.unwrap();
        assert!((slope - 3.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn shifted_spectrum_clusters_at_one_for_tiny_shift() {
        let mut params = SpectrumParams::new(20.0, 2);
        params.beta2 = 1e-10;
        let data = spectrum_study(&ModelProblem::mp1b(20.0, 0.5), Composition::Shifted, params, 500).unwrap();
        assert_eq!(data.eigenvalues.len(), params.n_elements + 2 - 2);
        assert!(data.eigenvalues.iter().all(|l| (l - C64::new(1.0, 0.0)).norm() < 1e-6));
    }

    #[test]
    fn deflated_spectrum_has_coarse_dimension_zeros() {
        let params = SpectrumParams::new(50.0, 2);
        let data = spectrum_study(&ModelProblem::mp1b(50.0, 0.5), Composition::Deflated, params, 500).unwrap();
        let n = data.eigenvalues.len();
        assert_eq!(data.near_zero(1e-6), n / 2);
    }

    #[test]
    fn cap_is_enforced() {
        let params = SpectrumParams::new(100.0, 1);
        let err = spectrum_study(&ModelProblem::mp1b(100.0, 0.5), Composition::Deflated, params, 10).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn spectrum_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(output_name("spectrum", "mp1b", 2, 50.0));
        let values = vec![C64::new(1.5, -0.25), C64::new(0.0, 1e-9)];
        write_spectrum_csv(&path, &values).unwrap();
        assert_eq!(read_spectrum_csv(&path).unwrap(), values);
        assert!(path.ends_with("spectrum_mp1b_p2_k50.csv"));
    }

    #[test]
    fn compositions_parse() {
        for c in Composition::ALL {
            assert_eq!(c.label().parse::<Composition>().unwrap(), c);
        }
    }
}
