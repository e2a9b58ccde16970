//! Complex linear algebra kernels shared by the assembly and solver layers.

pub mod direct;
pub mod eigen;
pub mod gmres;
pub mod sparse;

pub use direct::{sparse_lu_solve, SparseLu};
pub use eigen::{dense_eigenvalues, materialize};
pub use gmres::{gmres, GmresReport};
pub use sparse::CsrMatrix;

use crate::C64;

/// Abstract linear map `v ↦ Op·v` on `C^n`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, v: &[C64]) -> Vec<C64>;

    fn describe(&self) -> String {
        format!("operator of size {}", self.dim())
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.mul_vec(v)
    }

    fn describe(&self) -> String {
        format!("sparse matrix {}x{} ({} nonzeros)", self.nrows(), self.ncols(), self.nnz())
    }
}

/// Wraps a closure as a [`LinearOperator`].
pub struct FnOperator<F> {
    n: usize,
    tag: String,
    f: F,
}

impl<F: Fn(&[C64]) -> Vec<C64> + Sync> FnOperator<F> {
    pub fn new(n: usize, tag: impl Into<String>, f: F) -> Self {
        Self { n, tag: tag.into(), f }
    }
}

impl<F: Fn(&[C64]) -> Vec<C64> + Sync> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        (self.f)(v)
    }

    fn describe(&self) -> String {
        self.tag.clone()
    }
}

/// Identity on `C^n`.
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        v.to_vec()
    }

    fn describe(&self) -> String {
        "identity".into()
    }
}

/// Hermitian inner product `Σ conj(a_i) b_i`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y ← y + alpha x`
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn real_vec(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// `‖a - b‖ / ‖b‖`, or `‖a‖` when `b` vanishes.
pub fn relative_difference(a: &[C64], b: &[C64]) -> f64 {
    let nb = norm2(b);
    let d = norm2(&sub(a, b));
    if nb == 0.0 {
        d
    } else {
        d / nb
    }
}
