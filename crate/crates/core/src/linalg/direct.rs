//! Sparse direct solves through faer's supernodal LU.

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::Lu;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::C64;

/// LU factorization with partial pivoting of a square sparse matrix.
pub struct SparseLu {
    n: usize,
    lu: Lu<usize, C64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.n).finish()
    }
}

impl SparseLu {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::ShapeMismatch(format!("LU of a {}x{} matrix", a.nrows(), a.ncols())));
        }
        let lu = a
            .to_faer()?
            .sp_lu()
            .map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
        let out = Self { n: a.nrows(), lu };
        // faer reports numerical singularity through non-finite factors; probe once.
        if out.n > 0 {
            let probe = out.solve_unchecked(&vec![C64::new(1.0, 0.0); out.n]);
            if probe.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Singular("LU factors are not finite".into()));
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: b.len() });
        }
        let x = self.solve_unchecked(b);
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Singular("direct solve produced non-finite values".into()));
        }
        Ok(x)
    }

    fn solve_unchecked(&self, b: &[C64]) -> Vec<C64> {
        let mut rhs = faer::Mat::<C64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place_with_conj(faer::Conj::No, rhs.as_mut());
        (0..self.n).map(|i| rhs[(i, 0)]).collect()
    }
}

/// Factorizes `a` and solves `a x = b`.
pub fn sparse_lu_solve(a: &CsrMatrix, b: &[C64]) -> Result<Vec<C64>> {
    SparseLu::new(a)?.solve(b)
}
