//! Mesh refinement for the plane-wave problem at k = 1: errors per element count
//! and the fitted convergence rate for p = 1..5.

use helmholtz_iga::analysis::{convergence_study, ErrorMetric};
use helmholtz_iga::problems::ModelProblem;

fn main() -> helmholtz_iga::Result<()> {
    let problem = ModelProblem::mp1a(1.0);
    let counts = [8, 16, 32, 64];
    println!("{:>3} {:>9} {:>13} {:>13}", "p", "elements", "L2 (quad)", "sampled");
    for p in 1..=5 {
        let study = convergence_study(&problem, p, &counts, ErrorMetric::Quadrature)?;
        for r in &study.reports {
            println!("{p:>3} {:>9} {:>13.3e} {:>13.3e}", r.n_elements, r.l2_error, r.sampled_error);
        }
        let sampled = study.refit(ErrorMetric::Sampled)?;
        let show = |s: Option<f64>| s.map_or("n/a".into(), |v| format!("{v:.2}"));
        println!("    rate {} (quadrature), {} (sampled), expected {}\n", show(study.slope), show(sampled.slope), p + 1);
    }
    Ok(())
}
