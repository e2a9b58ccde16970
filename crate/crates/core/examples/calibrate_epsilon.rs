//! Sweep behind the default deflation weight: GMRES iterations with the
//! epsilon-weighted deflation on the 1D point-source problem, p = 2, k = 10^3,
//! with larger k as the tie-breaker.
//!
//! cargo run --release --example calibrate_epsilon -- 1000 10000 100000

use helmholtz_iga::assembly::build_system;
use helmholtz_iga::precond::{compose_spec, PreconditionerSpec, PreconditionerTag};
use helmholtz_iga::problems::{resolution_for, ModelProblem};

fn main() -> helmholtz_iga::Result<()> {
    let mut ks: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if ks.is_empty() {
        ks = vec![1e3, 1e4, 1e5];
    }
    let p = 2;
    let epsilons = [0.0, 0.025, 0.05, 0.1, 0.125, 0.15, 0.175, 0.2, 0.25, 0.3, 0.4, 0.5];
    print!("{:>7}", "eps");
    for k in &ks {
        print!(" {k:>8}");
    }
    println!();
    let systems: Vec<_> = ks
        .iter()
        .map(|&k| build_system(&ModelProblem::mp1b(k, 0.5), resolution_for(k, 0.625), p))
        .collect::<Result<_, _>>()?;
    for eps in epsilons {
        print!("{eps:>7.3}");
        for sys in &systems {
            let spec = PreconditionerSpec { epsilon: eps, ..PreconditionerSpec::new(PreconditionerTag::DEps) };
            let out = compose_spec(&sys.a, &sys.k2_mass, &sys.grid_shape(), &spec)?.solve(&sys.rhs, 1e-7, 100)?;
            let cell = if out.report.converged { out.report.iterations.to_string() } else { "*".into() };
            print!(" {cell:>8}");
        }
        println!();
    }
    Ok(())
}
