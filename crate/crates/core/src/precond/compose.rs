//! Left-preconditioned operators built from deflation and the shifted Laplacian.
//!
//! With both parts present GMRES is run on `M⁻¹ P A y = M⁻¹ P f` from a zero
//! guess and the solution is recovered as `x = Q f + Pᵀ y`. A converged `y`
//! satisfies `P A y = P f`, which fixes `y` up to the range of `Z`; `Pᵀ`
//! annihilates that range, and `A (Q f + Pᵀ y) = (I - P) f + P A y = f`.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gmres, CsrMatrix, GmresReport, LinearOperator};
use crate::precond::cslp::{build_cslp, Cslp, CslpSpec, Inversion};
use crate::precond::deflation::{build_deflation, DeflationOperators, DeflationSpec};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PreconditionerTag {
    None,
    /// Deflation with the plain Bezier stencil.
    D,
    /// Deflation with the ε-weighted stencil.
    DEps,
    /// Shifted Laplacian inverted by a direct solve.
    CEx,
    /// Plain deflation combined with multigrid shifted Laplacian.
    DcMg,
    /// ε-weighted deflation combined with multigrid shifted Laplacian.
    DepsCMg,
}

impl PreconditionerTag {
    pub const ALL: [PreconditionerTag; 6] = [
        PreconditionerTag::None,
        PreconditionerTag::D,
        PreconditionerTag::DEps,
        PreconditionerTag::CEx,
        PreconditionerTag::DcMg,
        PreconditionerTag::DepsCMg,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PreconditionerTag::None => "none",
            PreconditionerTag::D => "D",
            PreconditionerTag::DEps => "D_eps",
            PreconditionerTag::CEx => "C_ex",
            PreconditionerTag::DcMg => "DC_MG",
            PreconditionerTag::DepsCMg => "Deps_C_MG",
        }
    }

    pub fn uses_deflation(self) -> bool {
        matches!(self, PreconditionerTag::D | PreconditionerTag::DEps | PreconditionerTag::DcMg | PreconditionerTag::DepsCMg)
    }

    pub fn uses_epsilon(self) -> bool {
        matches!(self, PreconditionerTag::DEps | PreconditionerTag::DepsCMg)
    }
}

impl fmt::Display for PreconditionerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PreconditionerTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PreconditionerTag::ALL
            .into_iter()
            .find(|t| t.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preconditioner '{s}'")))
    }
}

/// Fully resolved preconditioner parameters for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreconditionerSpec {
    pub tag: PreconditionerTag,
    /// Stencil weight; only read by the ε-weighted tags.
    pub epsilon: f64,
    pub beta2: f64,
    pub cycles: usize,
    pub nu: usize,
    pub omega: f64,
}

impl PreconditionerSpec {
    pub fn new(tag: PreconditionerTag) -> Self {
        Self { tag, epsilon: crate::precond::DEFAULT_EPSILON, beta2: 1.0, cycles: 1, nu: 1, omega: 0.6 }
    }

    pub fn deflation(&self) -> Option<DeflationSpec> {
        self.tag.uses_deflation().then(|| DeflationSpec {
            epsilon: if self.tag.uses_epsilon() { self.epsilon } else { 0.0 },
        })
    }

    pub fn cslp(&self) -> Option<CslpSpec> {
        match self.tag {
            PreconditionerTag::CEx => Some(CslpSpec { beta2: self.beta2, inversion: Inversion::Exact }),
            PreconditionerTag::DcMg | PreconditionerTag::DepsCMg => Some(CslpSpec {
                beta2: self.beta2,
                inversion: Inversion::VCycles { cycles: self.cycles, nu: self.nu, omega: self.omega },
            }),
            _ => None,
        }
    }
}

/// Machine-independent work counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationCounts {
    pub matvecs: usize,
    pub coarse_solves: usize,
    pub cslp_applications: usize,
    pub vcycles: usize,
}

#[derive(Default)]
struct Counters {
    matvecs: AtomicUsize,
    coarse_solves: AtomicUsize,
    cslp_applications: AtomicUsize,
}

/// `A` together with its (optional) deflation and shifted-Laplacian parts.
pub struct ComposedSystem<'a> {
    a: &'a CsrMatrix,
    deflation: Option<DeflationOperators<'a>>,
    cslp: Option<Cslp>,
    counters: Counters,
    failure: Mutex<Option<Error>>,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub report: GmresReport,
    /// Solution of `A x = f` after recovery.
    pub solution: Vec<C64>,
    pub counts: OperationCounts,
}

/// Builds the composed operator; `shape` is the retained grid shape of `a`.
pub fn compose<'a>(
    a: &'a CsrMatrix,
    k2_mass: &CsrMatrix,
    shape: &[usize],
    deflation: Option<DeflationSpec>,
    cslp: Option<CslpSpec>,
) -> Result<ComposedSystem<'a>> {
    let n: usize = shape.iter().product();
    if a.nrows() != n || k2_mass.nrows() != n {
        return Err(Error::SizeMismatch { expected: n, got: a.nrows() });
    }
    let deflation = deflation.map(|d| build_deflation(a, shape, d)).transpose()?;
    let cslp = cslp.map(|c| build_cslp(a, k2_mass, shape, c)).transpose()?;
    Ok(ComposedSystem { a, deflation, cslp, counters: Counters::default(), failure: Mutex::new(None) })
}

/// Builds the composed operator for a tagged preconditioner.
pub fn compose_spec<'a>(a: &'a CsrMatrix, k2_mass: &CsrMatrix, shape: &[usize], spec: &PreconditionerSpec) -> Result<ComposedSystem<'a>> {
    compose(a, k2_mass, shape, spec.deflation(), spec.cslp())
}

impl<'a> ComposedSystem<'a> {
    pub fn deflation(&self) -> Option<&DeflationOperators<'a>> {
        self.deflation.as_ref()
    }

    pub fn cslp(&self) -> Option<&Cslp> {
        self.cslp.as_ref()
    }

    pub fn counts(&self) -> OperationCounts {
        OperationCounts {
            matvecs: self.counters.matvecs.load(Ordering::Relaxed),
            coarse_solves: self.counters.coarse_solves.load(Ordering::Relaxed),
            cslp_applications: self.counters.cslp_applications.load(Ordering::Relaxed),
            vcycles: self.cslp.as_ref().map_or(0, Cslp::vcycles_done),
        }
    }

    fn mul_a(&self, v: &[C64]) -> Vec<C64> {
        self.counters.matvecs.fetch_add(1, Ordering::Relaxed);
        self.a.mul_vec(v)
    }

    fn precondition(&self, v: Vec<C64>) -> Result<Vec<C64>> {
        match &self.cslp {
            Some(c) => {
                self.counters.cslp_applications.fetch_add(1, Ordering::Relaxed);
                c.apply(&v)
            }
            None => Ok(v),
        }
    }

    fn project(&self, v: Vec<C64>) -> Result<Vec<C64>> {
        match &self.deflation {
            Some(d) => {
                self.counters.coarse_solves.fetch_add(1, Ordering::Relaxed);
                self.counters.matvecs.fetch_add(1, Ordering::Relaxed);
                d.apply_p(&v)
            }
            None => Ok(v),
        }
    }

    fn try_apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let w = self.mul_a(v);
        let w = self.project(w)?;
        self.precondition(w)
    }

    /// Right-hand side `M⁻¹ P f` of the preconditioned system.
    pub fn preconditioned_rhs(&self, f: &[C64]) -> Result<Vec<C64>> {
        let pf = self.project(f.to_vec())?;
        self.precondition(pf)
    }

    /// `x = Q f + Pᵀ y` (or `y` without deflation).
    pub fn recover(&self, y: &[C64], f: &[C64]) -> Result<Vec<C64>> {
        match &self.deflation {
            Some(d) => {
                self.counters.coarse_solves.fetch_add(2, Ordering::Relaxed);
                self.counters.matvecs.fetch_add(1, Ordering::Relaxed);
                let qf = d.q(f)?;
                let pty = d.apply_pt(y)?;
                Ok(qf.iter().zip(&pty).map(|(a, b)| a + b).collect())
            }
            None => Ok(y.to_vec()),
        }
    }

    pub fn solve(&self, f: &[C64], tol: f64, max_it: usize) -> Result<SolveOutcome> {
        let rhs = self.preconditioned_rhs(f)?;
        let report = gmres(self, &rhs, tol, max_it)?;
        if let Some(err) = self.failure.lock().expect("failure slot").take() {
            return Err(err);
        }
        let solution = self.recover(&report.solution, f)?;
        Ok(SolveOutcome { report, solution, counts: self.counts() })
    }
}

impl LinearOperator for ComposedSystem<'_> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self.try_apply(v) {
            Ok(w) => w,
            Err(e) => {
                let mut slot = self.failure.lock().expect("failure slot");
                slot.get_or_insert(e);
                vec![C64::new(f64::NAN, f64::NAN); v.len()]
            }
        }
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.cslp.is_some() {
            parts.push("M^-1");
        }
        if self.deflation.is_some() {
            parts.push("P");
        }
        parts.push("A");
        parts.join(" ")
    }
}
