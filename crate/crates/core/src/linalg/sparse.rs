//! Compressed sparse row storage for complex matrices.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::C64;

/// Row count above which matrix-vector products fan out over rayon.
const PARALLEL_ROWS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    ///
    /// Entries are summed in the order they appear, so identical input gives
    /// bitwise-identical output.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({r}, {c}) outside a {nrows}x{ncols} matrix"
                )));
            }
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![C64::new(0.0, 0.0); triplets.len()];
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..nrows {
            let (lo, hi) = (counts[r], counts[r + 1]);
            order.clear();
            order.extend(lo..hi);
            order.sort_by_key(|&t| (cols[t], t));
            for &t in &order {
                if indices.len() > indptr[r] && *indices.last().unwrap() == cols[t] {
                    *values.last_mut().unwrap() += vals[t];
                } else {
                    indices.push(cols[t]);
                    values.push(vals[t]);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { nrows, ncols, indptr, indices, values })
    }

    pub fn from_real_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let t: Vec<_> = triplets.iter().map(|&(r, c, v)| (r, c, C64::new(v, 0.0))).collect();
        Self::from_triplets(nrows, ncols, &t)
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(d: &[C64]) -> Self {
        let n = d.len();
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(pos) => vals[pos],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols, "matrix-vector size mismatch");
        let row_dot = |r: usize| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum::<C64>()
        };
        if self.nrows >= PARALLEL_ROWS {
            (0..self.nrows).into_par_iter().map(row_dot).collect()
        } else {
            (0..self.nrows).map(row_dot).collect()
        }
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![C64::new(0.0, 0.0); self.nnz()];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                indices[next[c]] = r;
                values[next[c]] = v;
                next[c] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, indptr: counts, indices, values }
    }

    /// Sparse product `self * other` (row-wise Gustavson accumulation).
    pub fn matmul(&self, other: &CsrMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::SizeMismatch { expected: self.ncols, got: other.nrows });
        }
        let zero = C64::new(0.0, 0.0);
        let mut acc = vec![zero; other.ncols];
        let mut marker = vec![usize::MAX; other.ncols];
        let mut touched = Vec::new();
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.nrows {
            touched.clear();
            let (cols, vals) = self.row(r);
            for (&k, &a) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(k);
                for (&c, &b) in ocols.iter().zip(ovals) {
                    if marker[c] != r {
                        marker[c] = r;
                        acc[c] = zero;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                indices.push(c);
                values.push(acc[c]);
            }
            indptr.push(indices.len());
        }
        Ok(Self { nrows: self.nrows, ncols: other.ncols, indptr, indices, values })
    }

    /// Galerkin triple product `Pᵀ self P`.
    pub fn galerkin(&self, p: &CsrMatrix) -> Result<Self> {
        p.transpose().matmul(&self.matmul(p)?)
    }

    /// `alpha * self + beta * other`.
    /// `alpha·self + beta·other`, merging the sorted rows.
    pub fn linear_combination(&self, alpha: C64, other: &CsrMatrix, beta: C64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(indices.capacity());
        indptr.push(0);
        for r in 0..self.nrows {
            let (ca, va) = self.row(r);
            let (cb, vb) = other.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ca.len() || j < cb.len() {
                if j == cb.len() || (i < ca.len() && ca[i] < cb[j]) {
                    indices.push(ca[i]);
                    values.push(alpha * va[i]);
                    i += 1;
                } else if i == ca.len() || cb[j] < ca[i] {
                    indices.push(cb[j]);
                    values.push(beta * vb[j]);
                    j += 1;
                } else {
                    indices.push(ca[i]);
                    values.push(alpha * va[i] + beta * vb[j]);
                    i += 1;
                    j += 1;
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { nrows: self.nrows, ncols: self.ncols, indptr, indices, values })
    }

    /// Takes ownership of CSR arrays whose rows are already sorted and free of duplicates.
    pub(crate) fn from_sorted_parts(nrows: usize, ncols: usize, indptr: Vec<usize>, indices: Vec<usize>, values: Vec<C64>) -> Self {
        debug_assert_eq!(indptr.len(), nrows + 1);
        debug_assert_eq!(indices.len(), values.len());
        debug_assert!((0..nrows).all(|r| indices[indptr[r]..indptr[r + 1]].windows(2).all(|w| w[0] < w[1])));
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Restriction to the given rows and columns, renumbered in the order given.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for &r in rows {
            let (rc, rv) = self.row(r);
            let mut entries: Vec<(usize, C64)> = rc
                .iter()
                .zip(rv)
                .filter(|(&c, _)| col_map[c] != usize::MAX)
                .map(|(&c, &v)| (col_map[c], v))
                .collect();
            entries.sort_by_key(|e| e.0);
            for (c, v) in entries {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { nrows: rows.len(), ncols: cols.len(), indptr, indices, values }
    }

    /// Column `c` restricted to the given rows.
    pub fn column(&self, c: usize, rows: &[usize]) -> Vec<C64> {
        rows.iter().map(|&r| self.get(r, c)).collect()
    }

    /// Kronecker product `self ⊗ other`: entry `(i1*m + i2, j1*n + j2) = a_{i1 j1} b_{i2 j2}`.
    pub fn kron(&self, other: &CsrMatrix) -> Self {
        let (m, n) = (other.nrows, other.ncols);
        let mut indptr = vec![0];
        let mut indices = Vec::with_capacity(self.nnz() * other.nnz());
        let mut values = Vec::with_capacity(self.nnz() * other.nnz());
        for i1 in 0..self.nrows {
            let (ac, av) = self.row(i1);
            for i2 in 0..m {
                let (bc, bv) = other.row(i2);
                for (&j1, &a) in ac.iter().zip(av) {
                    for (&j2, &b) in bc.iter().zip(bv) {
                        indices.push(j1 * n + j2);
                        values.push(a * b);
                    }
                }
                indptr.push(indices.len());
            }
        }
        Self { nrows: self.nrows * m, ncols: self.ncols * n, indptr, indices, values }
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.ncols];
        for (&c, v) in self.indices.iter().zip(&self.values) {
            sums[c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        self.linear_combination(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
            .map(|d| d.values.iter().map(|v| v.norm()).fold(0.0, f64::max))
            .unwrap_or(f64::INFINITY)
    }

    pub fn to_dense(&self) -> faer::Mat<C64> {
        let mut m = faer::Mat::<C64>::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn to_faer(&self) -> Result<faer::sparse::SparseColMat<usize, C64>> {
        let t: Vec<_> = self.triplets().map(|(r, c, v)| faer::sparse::Triplet::new(r, c, v)).collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| Error::InvalidArgument(format!("sparse conversion failed: {e:?}")))
    }

    /// MatrixMarket coordinate text (`complex general`, 1-based indices).
    pub fn to_matrix_market(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("%%MatrixMarket matrix coordinate complex general\n");
        let _ = writeln!(s, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for (r, c, v) in self.triplets() {
            let _ = writeln!(s, "{} {} {:.17e} {:.17e}", r + 1, c + 1, v.re, v.im);
        }
        s
    }

    pub fn from_matrix_market(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Config { line, message: msg.to_string() };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('%') && !l.trim().is_empty());
        let (ln, header) = lines.next().ok_or_else(|| bad(1, "missing size line"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(ln + 1, "bad size line")))
            .collect::<Result<_>>()?;
        if dims.len() != 3 {
            return Err(bad(ln + 1, "size line needs three integers"));
        }
        let mut t = Vec::with_capacity(dims[2]);
        for (ln, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad(ln + 1, "entry needs row, col, re, im"));
            }
            let r: usize = f[0].parse().map_err(|_| bad(ln + 1, "bad row"))?;
            let c: usize = f[1].parse().map_err(|_| bad(ln + 1, "bad column"))?;
            let re: f64 = f[2].parse().map_err(|_| bad(ln + 1, "bad real part"))?;
            let im: f64 = f[3].parse().map_err(|_| bad(ln + 1, "bad imaginary part"))?;
            if r == 0 || c == 0 {
                return Err(bad(ln + 1, "indices are 1-based"));
            }
            t.push((r - 1, c - 1, C64::new(re, im)));
        }
        Self::from_triplets(dims[0], dims[1], &t)
    }
}
