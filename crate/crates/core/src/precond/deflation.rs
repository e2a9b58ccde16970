//! Two-level deflation with the quadratic Bezier transfer operator.
//!
//! With fine points `j = 1..n` and coarse points `m = 1..⌊n/2⌋` (1-based),
//! the prolongation `Z` is
//!
//! ```text
//! even j: (1/8) (c_{j/2-1} + (6 - ε) c_{j/2} + c_{j/2+1})
//! odd  j: (1/2) (c_{(j-1)/2} + c_{(j+1)/2})
//! ```
//!
//! where coarse indices outside `1..⌊n/2⌋` are dropped. In 2D the operator is
//! `Z_y ⊗ Z_x` on the lexicographic (x-fastest) grid. With `E = ZᵀAZ` and
//! `Q = Z E⁻¹ Zᵀ`, the projections are `P = I - AQ` and `Pᵀ = I - QA`.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, SparseLu};
use crate::precond::bezier::quadratic_stencil;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflationSpec {
    pub epsilon: f64,
}

/// Coarse size for a fine size `n`.
pub fn coarse_size(n: usize) -> usize {
    n / 2
}

/// Nonzero entries `(fine_row, weight)` of column `m` (0-based) of the 1D prolongation.
fn column_entries(m: usize, n: usize, epsilon: f64) -> impl Iterator<Item = (usize, f64)> {
    let [outer, centre, _] = quadratic_stencil();
    let centre = centre - epsilon / 8.0;
    // 1-based coarse index mm = m + 1 touches fine rows 2mm-2 ..= 2mm+2
    let mm = m + 1;
    let rows = [(2 * mm - 2, outer), (2 * mm - 1, 0.5), (2 * mm, centre), (2 * mm + 1, 0.5), (2 * mm + 2, outer)];
    rows.into_iter().filter(move |&(j, _)| j >= 1 && j <= n).map(|(j, w)| (j - 1, w))
}

/// `Z c` for a 1D coarse vector `c` of length `⌊n/2⌋`.
pub fn apply_z_1d(coarse: &[C64], n_fine: usize, epsilon: f64) -> Result<Vec<C64>> {
    let nc = coarse_size(n_fine);
    if coarse.len() != nc {
        return Err(Error::SizeMismatch { expected: nc, got: coarse.len() });
    }
    let outer = 1.0 / 8.0;
    let centre = (6.0 - epsilon) / 8.0;
    let at = |m: isize| -> C64 {
        if m >= 1 && (m as usize) <= nc {
            coarse[m as usize - 1]
        } else {
            C64::new(0.0, 0.0)
        }
    };
    Ok((1..=n_fine as isize)
        .map(|j| {
            if j % 2 == 0 {
                let h = j / 2;
                (at(h - 1) + at(h + 1)) * outer + at(h) * centre
            } else {
                (at((j - 1) / 2) + at((j + 1) / 2)) * 0.5
            }
        })
        .collect())
}

/// `Zᵀ u`: `(1/8) (u_{2m-2} + 4 u_{2m-1} + (6 - ε) u_{2m} + 4 u_{2m+1} + u_{2m+2})`.
pub fn apply_zt_1d(fine: &[C64], epsilon: f64) -> Vec<C64> {
    let n = fine.len();
    (0..coarse_size(n))
        .map(|m| column_entries(m, n, epsilon).map(|(j, w)| fine[j] * w).sum())
        .collect()
}

/// Explicit `n × ⌊n/2⌋` quadratic Bezier prolongation.
pub fn bezier_prolongation(n: usize, epsilon: f64) -> CsrMatrix {
    let t: Vec<_> = (0..coarse_size(n)).flat_map(|m| column_entries(m, n, epsilon).map(move |(j, w)| (j, m, w))).collect();
    CsrMatrix::from_real_triplets(n, coarse_size(n), &t).expect("stencil stays in range")
}

/// Standard linear interpolation: column `m` has `1/2, 1, 1/2` on fine rows `2m-1, 2m, 2m+1`.
pub fn linear_prolongation(n: usize) -> CsrMatrix {
    let t: Vec<_> = (1..=coarse_size(n))
        .flat_map(|m| [(2 * m - 1, 0.5), (2 * m, 1.0), (2 * m + 1, 0.5)].into_iter().map(move |(j, w)| (j, m, w)))
        .filter(|&(j, _, _)| j >= 1 && j <= n)
        .map(|(j, m, w)| (j - 1, m - 1, w))
        .collect();
    CsrMatrix::from_real_triplets(n, coarse_size(n), &t).expect("stencil stays in range")
}

/// Tensor prolongation on a grid of shape `[nx]` or `[nx, ny]`.
pub fn tensor_prolongation(shape: &[usize], one_d: impl Fn(usize) -> CsrMatrix) -> Result<CsrMatrix> {
    match shape {
        [nx] => Ok(one_d(*nx)),
        [nx, ny] => Ok(one_d(*ny).kron(&one_d(*nx))),
        _ => Err(Error::InvalidArgument(format!("unsupported grid shape {shape:?}"))),
    }
}

/// Matrix-free `(Z_y ⊗ Z_x) c` on an `nx × ny` fine grid.
pub fn apply_z_2d(coarse: &[C64], nx: usize, ny: usize, epsilon: f64) -> Result<Vec<C64>> {
    let (cx, cy) = (coarse_size(nx), coarse_size(ny));
    if coarse.len() != cx * cy {
        return Err(Error::SizeMismatch { expected: cx * cy, got: coarse.len() });
    }
    // x direction on every coarse row, then y direction on every fine column
    let mut half = vec![C64::new(0.0, 0.0); nx * cy];
    for r in 0..cy {
        let row = apply_z_1d(&coarse[r * cx..(r + 1) * cx], nx, epsilon)?;
        half[r * nx..(r + 1) * nx].copy_from_slice(&row);
    }
    let mut out = vec![C64::new(0.0, 0.0); nx * ny];
    let mut col = vec![C64::new(0.0, 0.0); cy];
    for i in 0..nx {
        for r in 0..cy {
            col[r] = half[r * nx + i];
        }
        for (j, v) in apply_z_1d(&col, ny, epsilon)?.into_iter().enumerate() {
            out[j * nx + i] = v;
        }
    }
    Ok(out)
}

/// Matrix-free `(Z_y ⊗ Z_x)ᵀ u`.
pub fn apply_zt_2d(fine: &[C64], nx: usize, ny: usize, epsilon: f64) -> Result<Vec<C64>> {
    if fine.len() != nx * ny {
        return Err(Error::SizeMismatch { expected: nx * ny, got: fine.len() });
    }
    let (cx, cy) = (coarse_size(nx), coarse_size(ny));
    let mut half = vec![C64::new(0.0, 0.0); cx * ny];
    for j in 0..ny {
        let row = apply_zt_1d(&fine[j * nx..(j + 1) * nx], epsilon);
        half[j * cx..(j + 1) * cx].copy_from_slice(&row);
    }
    let mut out = vec![C64::new(0.0, 0.0); cx * cy];
    let mut col = vec![C64::new(0.0, 0.0); ny];
    for i in 0..cx {
        for j in 0..ny {
            col[j] = half[j * cx + i];
        }
        for (r, v) in apply_zt_1d(&col, epsilon).into_iter().enumerate() {
            out[r * cx + i] = v;
        }
    }
    Ok(out)
}

/// `Z`, `E = ZᵀAZ` (factorized) and the fine operator they were built from.
pub struct DeflationOperators<'a> {
    a: &'a CsrMatrix,
    z: CsrMatrix,
    zt: CsrMatrix,
    e: CsrMatrix,
    e_lu: SparseLu,
}

/// Builds the deflation operators for `a` on a retained grid of the given shape.
pub fn build_deflation<'a>(a: &'a CsrMatrix, shape: &[usize], spec: DeflationSpec) -> Result<DeflationOperators<'a>> {
    let n: usize = shape.iter().product();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::SizeMismatch { expected: n, got: a.nrows() });
    }
    if shape.iter().any(|&s| s < 2) {
        return Err(Error::InvalidArgument(format!("grid {shape:?} too small to coarsen")));
    }
    let z = tensor_prolongation(shape, |m| bezier_prolongation(m, spec.epsilon))?;
    DeflationOperators::from_prolongation(a, z)
}

impl<'a> DeflationOperators<'a> {
    pub fn from_prolongation(a: &'a CsrMatrix, z: CsrMatrix) -> Result<Self> {
        let zt = z.transpose();
        let e = zt.matmul(&a.matmul(&z)?)?;
        let e_lu = SparseLu::new(&e).map_err(|err| Error::Singular(format!("coarse matrix E: {err}")))?;
        Ok(Self { a, z, zt, e, e_lu })
    }

    pub fn a(&self) -> &CsrMatrix {
        self.a
    }

    pub fn z(&self) -> &CsrMatrix {
        &self.z
    }

    pub fn e(&self) -> &CsrMatrix {
        &self.e
    }

    pub fn coarse_dim(&self) -> usize {
        self.z.ncols()
    }

    /// `Q w = Z E⁻¹ Zᵀ w`.
    pub fn q(&self, w: &[C64]) -> Result<Vec<C64>> {
        Ok(self.z.mul_vec(&self.e_lu.solve(&self.zt.mul_vec(w))?))
    }

    /// `P w = w - A Q w`.
    pub fn apply_p(&self, w: &[C64]) -> Result<Vec<C64>> {
        let aq = self.a.mul_vec(&self.q(w)?);
        Ok(w.iter().zip(aq).map(|(x, y)| x - y).collect())
    }

    /// `Pᵀ w = w - Q A w`.
    pub fn apply_pt(&self, w: &[C64]) -> Result<Vec<C64>> {
        let qa = self.q(&self.a.mul_vec(w))?;
        Ok(w.iter().zip(qa).map(|(x, y)| x - y).collect())
    }

    /// The deflated operator `P A v`.
    pub fn apply_deflated(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.apply_p(&self.a.mul_vec(v))
    }
}
