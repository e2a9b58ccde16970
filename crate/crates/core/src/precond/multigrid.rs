//! Geometric multigrid for the shifted Laplacian: damped Jacobi smoothing,
//! linear-interpolation transfer and Galerkin coarse operators.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, SparseLu};
use crate::precond::deflation::{coarse_size, linear_prolongation, tensor_prolongation};
use crate::C64;

/// `x ← x + ω D⁻¹ (b - M x)`, repeated `steps` times.
pub fn damped_jacobi(m: &CsrMatrix, x: &[C64], b: &[C64], omega: f64, steps: usize) -> Result<Vec<C64>> {
    let inv_diag = inverse_diagonal(m)?;
    Ok(jacobi_sweeps(m, &inv_diag, x.to_vec(), b, omega, steps))
}

fn inverse_diagonal(m: &CsrMatrix) -> Result<Vec<C64>> {
    m.diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| if d.norm() == 0.0 { Err(Error::ZeroDiagonal(i)) } else { Ok(d.inv()) })
        .collect()
}

fn jacobi_sweeps(m: &CsrMatrix, inv_diag: &[C64], mut x: Vec<C64>, b: &[C64], omega: f64, steps: usize) -> Vec<C64> {
    for _ in 0..steps {
        let mx = m.mul_vec(&x);
        for i in 0..x.len() {
            x[i] += omega * inv_diag[i] * (b[i] - mx[i]);
        }
    }
    x
}

struct Level {
    m: CsrMatrix,
    inv_diag: Vec<C64>,
    /// Prolongation from the next coarser level.
    p: CsrMatrix,
    pt: CsrMatrix,
}

/// Galerkin hierarchy `M_{l+1} = P_lᵀ M_l P_l` ending in a direct solve.
pub struct Hierarchy {
    levels: Vec<Level>,
    coarsest: SparseLu,
    coarsest_dim: usize,
    nu: usize,
    omega: f64,
    cycles_done: AtomicUsize,
}

impl Hierarchy {
    /// Coarsens by `⌊n/2⌋` per dimension while every dimension exceeds `max_coarse`.
    pub fn new(m: CsrMatrix, shape: &[usize], nu: usize, omega: f64, max_coarse: usize) -> Result<Self> {
        Self::with_depth(m, shape, nu, omega, max_coarse, usize::MAX)
    }

    /// Exactly one coarsening step (the two-grid method).
    pub fn two_level(m: CsrMatrix, shape: &[usize], nu: usize, omega: f64) -> Result<Self> {
        Self::with_depth(m, shape, nu, omega, 1, 1)
    }

    fn with_depth(m: CsrMatrix, shape: &[usize], nu: usize, omega: f64, max_coarse: usize, depth: usize) -> Result<Self> {
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::InvalidArgument(format!("Jacobi damping {omega} outside (0, 1]")));
        }
        let n: usize = shape.iter().product();
        if m.nrows() != n {
            return Err(Error::SizeMismatch { expected: n, got: m.nrows() });
        }
        let mut levels = Vec::new();
        let mut shape = shape.to_vec();
        let mut current = m;
        while levels.len() < depth && shape.iter().all(|&s| s > max_coarse && s >= 2) {
            let p = tensor_prolongation(&shape, linear_prolongation)?;
            let pt = p.transpose();
            let coarse = pt.matmul(&current.matmul(&p)?)?;
            let inv_diag = inverse_diagonal(&current)?;
            levels.push(Level { m: current, inv_diag, p, pt });
            current = coarse;
            shape.iter_mut().for_each(|s| *s = coarse_size(*s));
        }
        let coarsest = SparseLu::new(&current)?;
        Ok(Self { levels, coarsest, coarsest_dim: current.nrows(), nu, omega, cycles_done: AtomicUsize::new(0) })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn coarsest_dim(&self) -> usize {
        self.coarsest_dim
    }

    pub fn fine_matrix(&self) -> Option<&CsrMatrix> {
        self.levels.first().map(|l| &l.m)
    }

    /// Number of V-cycles run so far.
    pub fn cycles_done(&self) -> usize {
        self.cycles_done.load(Ordering::Relaxed)
    }

    /// One V-cycle for `M x = b` from a zero initial guess.
    pub fn vcycle(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.cycles_done.fetch_add(1, Ordering::Relaxed);
        self.cycle_at(0, b)
    }

    fn cycle_at(&self, l: usize, b: &[C64]) -> Result<Vec<C64>> {
        let Some(level) = self.levels.get(l) else {
            return self.coarsest.solve(b);
        };
        let x = jacobi_sweeps(&level.m, &level.inv_diag, vec![C64::new(0.0, 0.0); b.len()], b, self.omega, self.nu);
        let mx = level.m.mul_vec(&x);
        let r: Vec<C64> = b.iter().zip(&mx).map(|(bi, mi)| bi - mi).collect();
        let ec = self.cycle_at(l + 1, &level.pt.mul_vec(&r))?;
        let mut x = x;
        for (xi, ci) in x.iter_mut().zip(level.p.mul_vec(&ec)) {
            *xi += ci;
        }
        Ok(jacobi_sweeps(&level.m, &level.inv_diag, x, b, self.omega, self.nu))
    }

    /// `cycles` V-cycles from zero, each applied to the current residual equation.
    pub fn solve_cycles(&self, b: &[C64], cycles: usize) -> Result<Vec<C64>> {
        if self.levels.is_empty() {
            // a direct solve is already exact; further cycles would add nothing
            self.cycles_done.fetch_add(cycles, Ordering::Relaxed);
            return self.coarsest.solve(b);
        }
        let mut x = vec![C64::new(0.0, 0.0); b.len()];
        for c in 0..cycles {
            let r: Vec<C64> = if c == 0 {
                b.to_vec()
            } else {
                let mx = self.apply_fine(&x);
                b.iter().zip(&mx).map(|(bi, mi)| bi - mi).collect()
            };
            for (xi, d) in x.iter_mut().zip(self.vcycle(&r)?) {
                *xi += d;
            }
        }
        Ok(x)
    }

    fn apply_fine(&self, x: &[C64]) -> Vec<C64> {
        self.levels[0].m.mul_vec(x)
    }
}

/// Explicit two-grid error propagation
/// `T = S^ν (I - Z M₂ₕ⁻¹ Zᵀ M) S^ν` with `S = I - ω D⁻¹ M`,
/// and the approximate inverse `M̃⁻¹ = (I - T) M⁻¹`, which is one two-grid
/// cycle from a zero guess.
pub struct TwoGridProxy {
    hierarchy: Hierarchy,
    m: CsrMatrix,
    inv_diag: Vec<C64>,
    z: CsrMatrix,
    zt: CsrMatrix,
    coarse: SparseLu,
    nu: usize,
    omega: f64,
}

/// Builds the two-grid proxy for `m` with the linear-interpolation transfer.
pub fn two_grid_proxy(m: &CsrMatrix, shape: &[usize], nu: usize, omega: f64) -> Result<TwoGridProxy> {
    let z = tensor_prolongation(shape, linear_prolongation)?;
    let zt = z.transpose();
    let coarse = SparseLu::new(&zt.matmul(&m.matmul(&z)?)?)?;
    Ok(TwoGridProxy {
        hierarchy: Hierarchy::two_level(m.clone(), shape, nu, omega)?,
        m: m.clone(),
        inv_diag: inverse_diagonal(m)?,
        z,
        zt,
        coarse,
        nu,
        omega,
    })
}

impl TwoGridProxy {
    fn smooth_error(&self, e: Vec<C64>) -> Vec<C64> {
        let zero = vec![C64::new(0.0, 0.0); e.len()];
        jacobi_sweeps(&self.m, &self.inv_diag, e, &zero, self.omega, self.nu)
    }

    /// `T e`.
    pub fn error_propagation(&self, e: &[C64]) -> Result<Vec<C64>> {
        let e = self.smooth_error(e.to_vec());
        let corr = self.z.mul_vec(&self.coarse.solve(&self.zt.mul_vec(&self.m.mul_vec(&e)))?);
        let e: Vec<C64> = e.iter().zip(corr).map(|(a, b)| a - b).collect();
        Ok(self.smooth_error(e))
    }

    /// `M̃⁻¹ b`.
    pub fn apply_inverse(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.hierarchy.vcycle(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm2, sub};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn laplacian(n: usize, shift: C64) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, c(2.0, 0.0) + shift));
            if i + 1 < n {
                t.push((i, i + 1, c(-1.0, 0.0)));
                t.push((i + 1, i, c(-1.0, 0.0)));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    fn lcg_vec(n: usize, seed: u64) -> Vec<C64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                c(a, b)
            })
            .collect()
    }

    #[test]
    fn jacobi_on_diagonal_is_exact() {
        let d = [c(2.0, 1.0), c(3.0, 0.0), c(-1.0, 0.5)];
        let m = CsrMatrix::from_diagonal(&d);
        let b = [c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0)];
        let x = damped_jacobi(&m, &[c(0.0, 0.0); 3], &b, 1.0, 1).unwrap();
        for i in 0..3 {
            assert!((x[i] - b[i] / d[i]).norm() < 1e-15);
        }
        let x0 = [c(5.0, 0.0); 3];
        assert_eq!(damped_jacobi(&m, &x0, &b, 0.6, 0).unwrap(), x0.to_vec());
        let z = CsrMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(damped_jacobi(&z, &[c(0.0, 0.0); 2], &[c(1.0, 0.0); 2], 0.6, 1), Err(Error::ZeroDiagonal(1))));
    }

    #[test]
    fn jacobi_reduces_error_on_dominant_matrix() {
        let m = laplacian(50, c(1.0, 0.0));
        let xs = lcg_vec(50, 1);
        let b = m.mul_vec(&xs);
        let mut x = vec![c(0.0, 0.0); 50];
        let mut err = norm2(&xs);
        for _ in 0..5 {
            x = damped_jacobi(&m, &x, &b, 0.6, 1).unwrap();
            let e = norm2(&sub(&x, &xs));
            assert!(e < err);
            err = e;
        }
    }

    #[test]
    fn single_level_is_direct() {
        let m = laplacian(20, c(0.0, 0.5));
        let h = Hierarchy::new(m.clone(), &[20], 1, 0.6, 32).unwrap();
        assert_eq!(h.n_levels(), 1);
        let b = lcg_vec(20, 2);
        let x = h.vcycle(&b).unwrap();
        assert!(norm2(&sub(&m.mul_vec(&x), &b)) < 1e-12);
    }

    #[test]
    fn two_grid_cycle_matches_error_propagation() {
        for shape in [vec![32usize], vec![8, 8]] {
            let n: usize = shape.iter().product();
            let m = if shape.len() == 1 {
                laplacian(n, c(0.3, 0.4))
            } else {
                let l = laplacian(8, c(0.0, 0.0));
                let id = CsrMatrix::identity(8);
                l.kron(&id)
                    .linear_combination(c(1.0, 0.0), &id.kron(&l), c(1.0, 0.0))
                    .unwrap()
                    .linear_combination(c(1.0, 0.0), &CsrMatrix::identity(64), c(0.2, 0.5))
                    .unwrap()
            };
            let proxy = two_grid_proxy(&m, &shape, 2, 0.6).unwrap();
            let xs = lcg_vec(n, 3);
            let b = m.mul_vec(&xs);
            // one cycle from zero: the error is T applied to the initial error -x*
            let x1 = proxy.apply_inverse(&b).unwrap();
            let e1 = sub(&x1, &xs);
            let minus: Vec<C64> = xs.iter().map(|v| -v).collect();
            let te = proxy.error_propagation(&minus).unwrap();
            assert!(norm2(&sub(&e1, &te)) < 1e-12 * norm2(&xs));
        }
    }

    #[test]
    fn poisson_limit_contracts_fast() {
        let n = 255;
        let m = laplacian(n, c(0.0, 0.0));
        let h = Hierarchy::new(m.clone(), &[n], 1, 0.6, 8).unwrap();
        assert!(h.n_levels() > 2);
        let b = lcg_vec(n, 4);
        let x = h.solve_cycles(&b, 10).unwrap();
        let rel = norm2(&sub(&m.mul_vec(&x), &b)) / norm2(&b);
        assert!(rel < 1e-6, "rel={rel}");
        assert_eq!(h.cycles_done(), 10);
    }

    #[test]
    fn invalid_damping_is_rejected() {
        assert!(Hierarchy::new(laplacian(8, c(0.0, 0.0)), &[8], 1, 1.5, 2).is_err());
    }
}
