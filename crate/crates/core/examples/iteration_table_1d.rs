//! GMRES iteration counts for the 1D point-source problem, k up to 10^4.
//! The full sweep up to 10^6 lives in `configs/` and runs through the CLI.

use helmholtz_iga::harness::{render_table, run_table, ExperimentConfig};

const CONFIG: &str = "
name = iterations_1d
problem = mp1b
k = 100, 1000, 10000
p = 1, 2, 3, 4, 5

[preconditioner D]
[preconditioner D_eps]
[preconditioner C_ex]
beta2 = 1/k
[preconditioner Deps_C_MG^10]
tag = Deps_C_MG
cycles = 10
";

fn main() -> helmholtz_iga::Result<()> {
    let cfg = ExperimentConfig::parse(CONFIG)?;
    let records = run_table(&cfg);
    for line in render_table(&records) {
        println!("{line}");
    }
    let work: usize = records.iter().map(|r| r.counts.matvecs).sum();
    println!("total matrix-vector products: {work}");
    Ok(())
}
