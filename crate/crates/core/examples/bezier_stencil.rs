//! Where the deflation stencil comes from: the rational quadratic Bezier blend
//! with weights (1/2, 3/2, 1/2) evaluated at t = 1/2, and the resulting
//! prolongation on a small grid.

use helmholtz_iga::precond::bezier::{rational_blend, QUADRATIC_WEIGHTS};
use helmholtz_iga::precond::deflation::bezier_prolongation;

fn main() -> helmholtz_iga::Result<()> {
    let blend = rational_blend(&QUADRATIC_WEIGHTS, 0.5)?;
    println!("blend at t = 1/2: {blend:?} (x 8 = {:?})", blend.iter().map(|b| b * 8.0).collect::<Vec<_>>());

    for epsilon in [0.0, 0.15] {
        let z = bezier_prolongation(9, epsilon);
        println!("\nZ for n = 9, epsilon = {epsilon} ({} x {}), scaled by 8:", z.nrows(), z.ncols());
        for r in 0..z.nrows() {
            let row: Vec<String> = (0..z.ncols()).map(|c| format!("{:>6.3}", 8.0 * z.get(r, c).re)).collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
