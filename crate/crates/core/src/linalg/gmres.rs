//! Full (unrestarted) GMRES with modified Gram-Schmidt and complex Givens rotations.

use serde::{Deserialize, Serialize};

use super::{axpy, dot, norm2, LinearOperator};
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmresReport {
    /// Arnoldi steps taken; the initial residual is not counted.
    pub iterations: usize,
    /// `‖r_j‖ / ‖b‖` after each step, from the least-squares residual.
    pub relative_residuals: Vec<f64>,
    pub converged: bool,
    /// The Krylov space became invariant before the tolerance was met,
    /// which means the iterate is the exact solution.
    pub breakdown: bool,
    #[serde(skip)]
    pub solution: Vec<C64>,
}

/// Solves `op x = rhs` from a zero initial guess.
///
/// Convergence is declared when the relative residual of the system handed in
/// drops to `tol`; with a left-preconditioned operator that is the
/// preconditioned residual.
pub fn gmres(op: &dyn LinearOperator, rhs: &[C64], tol: f64, max_it: usize) -> Result<GmresReport> {
    let n = op.dim();
    if rhs.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: rhs.len() });
    }
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("GMRES tolerance must be positive".into()));
    }
    let beta = norm2(rhs);
    if beta == 0.0 {
        return Err(Error::InvalidArgument("GMRES right-hand side is zero".into()));
    }
    let zero = C64::new(0.0, 0.0);
    let mut basis: Vec<Vec<C64>> = vec![rhs.iter().map(|v| v / beta).collect()];
    // column j of the Hessenberg matrix, already rotated
    let mut h_cols: Vec<Vec<C64>> = Vec::new();
    let mut cs: Vec<C64> = Vec::new();
    let mut sn: Vec<C64> = Vec::new();
    let mut g = vec![C64::new(beta, 0.0)];
    let mut history = Vec::new();
    let mut converged = false;
    let mut breakdown = false;

    for j in 0..max_it.min(n.max(1)) {
        let mut w = op.apply(&basis[j]);
        let mut h = vec![zero; j + 2];
        for (i, v) in basis.iter().enumerate().take(j + 1) {
            h[i] = dot(v, &w);
            axpy(-h[i], v, &mut w);
        }
        let h_next = norm2(&w);
        h[j + 1] = C64::new(h_next, 0.0);
        for i in 0..j {
            let t = cs[i].conj() * h[i] + sn[i].conj() * h[i + 1];
            h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
            h[i] = t;
        }
        let r = h[j].norm().hypot(h[j + 1].norm());
        let (c, s) = if r == 0.0 { (C64::new(1.0, 0.0), zero) } else { (h[j] / r, h[j + 1] / r) };
        cs.push(c);
        sn.push(s);
        h[j] = C64::new(r, 0.0);
        h[j + 1] = zero;
        g.push(-s * g[j]);
        g[j] = c.conj() * g[j];
        h_cols.push(h);
        let rel = g[j + 1].norm() / beta;
        history.push(rel);
        if rel <= tol {
            converged = true;
            break;
        }
        if h_next <= 1e-14 * beta {
            breakdown = true;
            converged = true;
            break;
        }
        basis.push(w.iter().map(|v| v / h_next).collect());
    }

    let m = h_cols.len();
    let mut y = vec![zero; m];
    for i in (0..m).rev() {
        let mut s = g[i];
        for (k, yk) in y.iter().enumerate().skip(i + 1) {
            s -= h_cols[k][i] * yk;
        }
        y[i] = if h_cols[i][i].norm() == 0.0 { zero } else { s / h_cols[i][i] };
    }
    let mut x = vec![zero; n];
    for (v, yi) in basis.iter().zip(&y) {
        axpy(*yi, v, &mut x);
    }
    Ok(GmresReport { iterations: m, relative_residuals: history, converged, breakdown, solution: x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::linalg::solvers::Solve;
    use crate::linalg::{sub, CsrMatrix, Identity};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0)];
        let r = gmres(&Identity(3), &b, 1e-12, 10).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        assert!(norm2(&sub(&r.solution, &b)) < 1e-14);
    }

    #[test]
    fn small_dense_system_matches_lu() {
        let mut rnd = lcg(7);
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                t.push((i, j, c(rnd(), rnd())));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let b: Vec<C64> = (0..n).map(|_| c(rnd(), rnd())).collect();
        let r = gmres(&a, &b, 1e-12, 50).unwrap();
        let rhs = faer::Mat::<C64>::from_fn(n, 1, |i, _| b[i]);
        let xd = a.to_dense().partial_piv_lu().solve(&rhs);
        let xd: Vec<C64> = (0..n).map(|i| xd[(i, 0)]).collect();
        assert!(norm2(&sub(&r.solution, &xd)) / norm2(&xd) < 1e-10);
    }

    #[test]
    fn residuals_do_not_increase_and_true_residual_agrees() {
        let mut rnd = lcg(99);
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, c(3.0 + rnd(), rnd())));
            for _ in 0..3 {
                t.push((i, ((rnd() + 0.5) * n as f64) as usize % n, c(rnd(), rnd())));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let b: Vec<C64> = (0..n).map(|_| c(rnd(), rnd())).collect();
        let r = gmres(&a, &b, 1e-12, n).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= n);
        for w in r.relative_residuals.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let true_rel = norm2(&sub(&a.mul_vec(&r.solution), &b)) / norm2(&b);
        assert!(true_rel <= 10.0 * r.relative_residuals.last().unwrap().max(1e-15));
    }

    #[test]
    fn exhaustion_is_flagged() {
        let n = 30;
        let t: Vec<_> = (0..n).map(|i| (i, i, c(1.0 + i as f64, 0.0))).collect();
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let b = vec![c(1.0, 0.0); n];
        let r = gmres(&a, &b, 1e-14, 3).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn rejects_zero_rhs() {
        assert!(gmres(&Identity(2), &[c(0.0, 0.0), c(0.0, 0.0)], 1e-7, 5).is_err());
    }
}
