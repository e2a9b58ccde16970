//! Solves the 1D point-source problem directly and compares the spline solution
//! with the closed-form Green's function at a handful of points.
//!
//! cargo run --release --example green_function -- 200 3

use helmholtz_iga::analysis::{sampled_error, solve_direct, DEFAULT_SAMPLES};
use helmholtz_iga::assembly::build_system;
use helmholtz_iga::problems::{greens_1d_closed, resolution_for, ModelProblem};

fn main() -> helmholtz_iga::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let k = args.first().copied().unwrap_or(200.0);
    let p = args.get(1).map_or(3, |&p| p as usize);
    let x_src = 0.5;

    let problem = ModelProblem::mp1b(k, x_src);
    let n_el = resolution_for(k, 0.625);
    let sys = build_system(&problem, n_el, p)?;
    let coeffs = solve_direct(&sys)?;
    println!("k = {k}, p = {p}, {n_el} elements, {} unknowns", sys.n());
    println!("{:>8} {:>14} {:>14} {:>10}", "x", "spline", "exact", "abs diff");
    for x in [0.05, 0.2, 0.35, 0.5, 0.61, 0.8, 0.95] {
        let u = sys.evaluate(&coeffs, x, 0.0)?;
        let g = greens_1d_closed(x, x_src, k)?;
        println!("{x:>8.3} {:>14.6e} {:>14.6e} {:>10.2e}", u.re, g, (u.re - g).abs().max(u.im.abs()));
    }
    let exact = problem.analytic().expect("the point-source problem has a closed form");
    println!("sampled error over {DEFAULT_SAMPLES} points: {:.3e}", sampled_error(&sys, &coeffs, &exact, DEFAULT_SAMPLES)?);
    Ok(())
}
