//! Prints B-spline basis values on a small open uniform knot vector as CSV.
//!
//! cargo run --example basis_functions -- 2 3

use helmholtz_iga::spline::KnotVector;

fn main() -> helmholtz_iga::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let p = args.first().copied().unwrap_or(2);
    let n_el = args.get(1).copied().unwrap_or(3);
    let kv = KnotVector::open_uniform(n_el, p)?;
    eprintln!("knots {:?}, {} basis functions", kv.knots(), kv.n_basis());

    let header: Vec<String> = (0..kv.n_basis()).map(|j| format!("N{j}")).collect();
    println!("x,{},sum", header.join(","));
    let samples = 12 * n_el;
    for i in 0..=samples {
        let x = i as f64 / samples as f64;
        let values: Vec<f64> = (0..kv.n_basis()).map(|j| kv.eval(j, x)).collect::<Result<_, _>>()?;
        let sum: f64 = values.iter().sum();
        let cols: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
        println!("{x:.4},{},{sum:.12}", cols.join(","));
    }
    Ok(())
}
