//! Spectrum of the deflated operator with and without the epsilon weight.
//! Writes `spectrum-PA_*.csv` files (re, im) into the directory given as the
//! first argument, default `spectra`.

use std::path::PathBuf;

use helmholtz_iga::analysis::{emit_spectrum, spectrum_study, Composition, SpectrumParams};
use helmholtz_iga::problems::ModelProblem;

fn main() -> helmholtz_iga::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "spectra".into()));
    std::fs::create_dir_all(&out)?;
    for (k, p) in [(50.0, 2), (250.0, 2), (50.0, 5), (250.0, 5)] {
        let problem = ModelProblem::mp1b(k, 0.5);
        for (name, epsilon) in [("D", 0.0), ("D_eps", helmholtz_iga::precond::DEFAULT_EPSILON)] {
            let params = SpectrumParams { epsilon, ..SpectrumParams::new(k, p) };
            let data = spectrum_study(&problem, Composition::Deflated, params, 2000)?;
            let path = emit_spectrum(&out, &format!("mp1b-{name}"), &data)?;
            println!(
                "k={k:<4} p={p} {name:<6} n={:<5} zero eigenvalues {:<4} min Re(rest)/|A| {:+.3e}  {}",
                data.eigenvalues.len(),
                data.near_zero(1e-6),
                data.min_real_part(1e-6).unwrap_or(f64::NAN) / data.a_norm,
                path.display()
            );
        }
    }
    Ok(())
}
