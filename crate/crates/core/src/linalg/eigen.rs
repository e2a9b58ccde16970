//! Dense spectra of operators small enough to materialize.

use super::LinearOperator;
use crate::error::{Error, Result};
use crate::C64;

/// Dense matrix whose column `j` is `op · e_j`.
pub fn materialize(op: &dyn LinearOperator, cap: usize) -> Result<faer::Mat<C64>> {
    let n = op.dim();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut m = faer::Mat::<C64>::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        let col = op.apply(&e);
        for (i, v) in col.into_iter().enumerate() {
            m[(i, j)] = v;
        }
        e[j] = C64::new(0.0, 0.0);
    }
    Ok(m)
}

/// All eigenvalues of `op`, sorted by real part then imaginary part.
pub fn dense_eigenvalues(op: &dyn LinearOperator, cap: usize) -> Result<Vec<C64>> {
    let m = materialize(op, cap)?;
    let mut ev = m
        .eigenvalues()
        .map_err(|e| Error::Singular(format!("eigenvalue iteration failed: {e:?}")))?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CsrMatrix, Identity};

    #[test]
    fn identity_spectrum() {
        let ev = dense_eigenvalues(&Identity(6), 100).unwrap();
        assert!(ev.iter().all(|l| (l - C64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn diagonal_spectrum() {
        let d: Vec<C64> = (1..=5).map(|i| C64::new(i as f64, 0.0)).collect();
        let ev = dense_eigenvalues(&CsrMatrix::from_diagonal(&d), 100).unwrap();
        for (l, i) in ev.iter().zip(1..=5) {
            assert!((l - C64::new(i as f64, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(dense_eigenvalues(&Identity(10), 5), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn materialized_sparse_matches_dense_copy() {
        let t = [(0, 0, 2.0), (0, 1, 1.0), (1, 0, -1.0), (1, 1, 3.0), (2, 2, 5.0), (2, 0, 0.5)];
        let a = CsrMatrix::from_real_triplets(3, 3, &t).unwrap();
        let ev = dense_eigenvalues(&a, 10).unwrap();
        let mut direct = a.to_dense().eigenvalues().unwrap();
        direct.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for (x, y) in ev.iter().zip(&direct) {
            assert!((x - y).norm() < 1e-8);
        }
    }
}
