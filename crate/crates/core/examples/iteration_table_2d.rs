//! 2D point source in the unit square: deflation with a multigrid shifted
//! Laplacian against its exact inverse. Kept to k <= 100 so it runs in a minute.

use helmholtz_iga::harness::{render_table, run_table, ExperimentConfig};

const CONFIG: &str = "
name = iterations_2d
problem = mp2a
k = 50, 100
p = 1, 2, 3

[preconditioner Deps_C_MG^12]
tag = Deps_C_MG
beta2 = 4.2
nu = 3
cycles = 12
[preconditioner C_ex]
beta2 = 1/(3k)
";

fn main() -> helmholtz_iga::Result<()> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let records = run_table(&cfg);
    for line in render_table(&records) {
        println!("{line}");
    }
    for r in &records {
        println!(
            "{:<14} p={} k={:<4} n={:<6} V-cycles {:<4} coarse solves {:<4} {:.2}s",
            r.preconditioner, r.p, r.k, r.n, r.counts.vcycles, r.counts.coarse_solves, r.wall_seconds
        );
    }
    Ok(())
}
