//! Isogeometric discretization of the Helmholtz equation together with the
//! solver stack used to study it: GMRES preconditioned by a complex shifted
//! Laplacian (exact or multigrid) and a two-level deflation whose transfer
//! operator comes from quadratic rational Bezier curves.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod precond;
pub mod problems;
pub mod spline;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
