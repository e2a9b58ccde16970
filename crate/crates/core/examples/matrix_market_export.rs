//! Writes the system matrix, the k^2-weighted mass matrix and the right-hand
//! side of one model problem in Matrix Market format for use in other tools.
//!
//! cargo run --release --example matrix_market_export -- mp2a 50 2 out_dir

use std::path::PathBuf;

use helmholtz_iga::assembly::build_system;
use helmholtz_iga::problems::{resolution_for, ModelProblem, ProblemId};

fn main() -> helmholtz_iga::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let id: ProblemId = args.first().map_or("mp1b", String::as_str).parse()?;
    let k: f64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(50.0);
    let p: usize = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(2);
    let out = PathBuf::from(args.get(3).map_or("matrix_market", String::as_str));

    let problem = ModelProblem::build(id, k)?;
    let sys = build_system(&problem, resolution_for(k, 0.625), p)?;
    std::fs::create_dir_all(&out)?;
    let stem = format!("{}_k{k}_p{p}", id.slug());
    std::fs::write(out.join(format!("{stem}_A.mtx")), sys.a.to_matrix_market())?;
    std::fs::write(out.join(format!("{stem}_K2.mtx")), sys.k2_mass.to_matrix_market())?;
    let mut rhs = format!("%%MatrixMarket matrix array complex general\n{} 1\n", sys.n());
    for v in &sys.rhs {
        rhs.push_str(&format!("{:.17e} {:.17e}\n", v.re, v.im));
    }
    std::fs::write(out.join(format!("{stem}_f.mtx")), rhs)?;
    println!("{} unknowns, {} nonzeros -> {}", sys.n(), sys.a.nnz(), out.display());
    Ok(())
}
