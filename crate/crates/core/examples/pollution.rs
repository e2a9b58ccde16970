//! Error growth with k at a fixed number of points per wavelength.
//!
//! cargo run --release --example pollution -- 0.625

use helmholtz_iga::analysis::pollution_study;
use helmholtz_iga::problems::ModelProblem;

fn main() -> helmholtz_iga::Result<()> {
    let kh: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.625);
    let ks = [100.0, 500.0, 1000.0, 2500.0, 5000.0];
    let ps = [1, 2, 3, 4, 5];
    let reports = pollution_study(ModelProblem::mp1a, &ps, &ks, &[kh])?;
    print!("{:>3}", "p");
    for k in ks {
        print!(" {k:>10}");
    }
    println!();
    for p in ps {
        print!("{p:>3}");
        for r in reports.iter().filter(|r| r.p == p) {
            print!(" {:>10.3e}", r.sampled_error);
        }
        println!();
    }
    Ok(())
}
