//! Model problems on the unit interval and unit square, and their analytic solutions.
//!
//! All problems use the operator `-Δu - k²u`. The 1D problems are a plane
//! wave driven from the left with an absorbing right end (`Mp1a`) and a point
//! source between two Dirichlet walls (`Mp1b`). The 2D problems put a point
//! source in the centre of the square, with constant (`Mp2a`) or piecewise
//! constant (`Mp2b`) wave number.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProblemId {
    Mp1a,
    Mp1b,
    Mp2a,
    Mp2b,
}

impl ProblemId {
    pub fn dim(self) -> usize {
        match self {
            ProblemId::Mp1a | ProblemId::Mp1b => 1,
            ProblemId::Mp2a | ProblemId::Mp2b => 2,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            ProblemId::Mp1a => "mp1a",
            ProblemId::Mp1b => "mp1b",
            ProblemId::Mp2a => "mp2a",
            ProblemId::Mp2b => "mp2b",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mp1a" => Ok(ProblemId::Mp1a),
            "mp1b" => Ok(ProblemId::Mp1b),
            "mp2a" => Ok(ProblemId::Mp2a),
            "mp2b" => Ok(ProblemId::Mp2b),
            _ => Err(Error::InvalidArgument(format!("unknown problem '{s}'"))),
        }
    }
}

/// Multipliers of the default layered wave-number field, indexed `[row][col]`
/// with row 0 at the bottom (`y ∈ [0, 1/4)`) and col 0 at the left.
pub const DEFAULT_STEP_TABLE: [[f64; 4]; 4] = [
    [0.50, 0.60, 0.55, 0.65],
    [0.90, 1.00, 0.85, 0.95],
    [1.20, 1.10, 1.25, 1.15],
    [1.50, 1.40, 1.45, 1.35],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WaveNumberField {
    Constant { k: f64 },
    Step { base_k: f64, multipliers: [[f64; 4]; 4] },
}

impl WaveNumberField {
    pub fn constant(k: f64) -> Self {
        WaveNumberField::Constant { k }
    }

    pub fn step(base_k: f64, multipliers: [[f64; 4]; 4]) -> Result<Self> {
        for row in &multipliers {
            for &m in row {
                if !(0.5..=1.5).contains(&m) {
                    return Err(Error::InvalidArgument(format!("step multiplier {m} outside [1/2, 3/2]")));
                }
            }
        }
        Ok(WaveNumberField::Step { base_k, multipliers })
    }

    pub fn base_k(&self) -> f64 {
        match self {
            WaveNumberField::Constant { k } => *k,
            WaveNumberField::Step { base_k, .. } => *base_k,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, WaveNumberField::Constant { .. })
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        step_wavenumber(x, y, self)
    }
}

/// Wave number at `(x, y)`; the step field is constant on each cell of a 4×4 grid.
pub fn step_wavenumber(x: f64, y: f64, field: &WaveNumberField) -> f64 {
    match field {
        WaveNumberField::Constant { k } => *k,
        WaveNumberField::Step { base_k, multipliers } => {
            let cell = |t: f64| ((t * 4.0).floor().max(0.0) as usize).min(3);
            base_k * multipliers[cell(y)][cell(x)]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    DirichletZero,
    DirichletOne,
    /// Sommerfeld-type absorbing condition `∂u/∂n - iku = 0`.
    Robin,
}

impl BoundaryCondition {
    pub fn is_dirichlet(self) -> bool {
        !matches!(self, BoundaryCondition::Robin)
    }

    pub fn dirichlet_value(self) -> Option<C64> {
        match self {
            BoundaryCondition::DirichletZero => Some(C64::new(0.0, 0.0)),
            BoundaryCondition::DirichletOne => Some(C64::new(1.0, 0.0)),
            BoundaryCondition::Robin => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProblem {
    pub id: ProblemId,
    pub wave: WaveNumberField,
    /// Location of the unit point source, if any (`y` ignored in 1D).
    pub source: Option<(f64, f64)>,
    /// Per boundary: `[x=0, x=1]` in 1D, `[x=0, x=1, y=0, y=1]` in 2D.
    pub bc: Vec<BoundaryCondition>,
}

impl ModelProblem {
    pub fn dim(&self) -> usize {
        self.id.dim()
    }

    /// Plane wave entering at `x = 0` and leaving through an absorbing end at `x = 1`.
    pub fn mp1a(k: f64) -> Self {
        Self {
            id: ProblemId::Mp1a,
            wave: WaveNumberField::constant(k),
            source: None,
            bc: vec![BoundaryCondition::DirichletOne, BoundaryCondition::Robin],
        }
    }

    /// Unit point source at `x_src` with homogeneous Dirichlet ends.
    pub fn mp1b(k: f64, x_src: f64) -> Self {
        Self {
            id: ProblemId::Mp1b,
            wave: WaveNumberField::constant(k),
            source: Some((x_src, 0.0)),
            bc: vec![BoundaryCondition::DirichletZero; 2],
        }
    }

    /// Centred point source, constant wave number, Dirichlet on the whole boundary.
    pub fn mp2a(k: f64) -> Self {
        Self {
            id: ProblemId::Mp2a,
            wave: WaveNumberField::constant(k),
            source: Some((0.5, 0.5)),
            bc: vec![BoundaryCondition::DirichletZero; 4],
        }
    }

    /// Constant-k square with chosen edges absorbing; order `[x=0, x=1, y=0, y=1]`.
    pub fn mp2a_with_robin(k: f64, robin_edges: [bool; 4]) -> Self {
        let bc = robin_edges
            .iter()
            .map(|&r| if r { BoundaryCondition::Robin } else { BoundaryCondition::DirichletZero })
            .collect();
        Self { bc, ..Self::mp2a(k) }
    }

    /// Centred point source in a layered wave-number field, Dirichlet everywhere.
    pub fn mp2b(base_k: f64, multipliers: [[f64; 4]; 4]) -> Result<Self> {
        Ok(Self {
            id: ProblemId::Mp2b,
            wave: WaveNumberField::step(base_k, multipliers)?,
            source: Some((0.5, 0.5)),
            bc: vec![BoundaryCondition::DirichletZero; 4],
        })
    }

    pub fn build(id: ProblemId, k: f64) -> Result<Self> {
        match id {
            ProblemId::Mp1a => Ok(Self::mp1a(k)),
            ProblemId::Mp1b => Ok(Self::mp1b(k, 0.5)),
            ProblemId::Mp2a => Ok(Self::mp2a(k)),
            ProblemId::Mp2b => Self::mp2b(k, DEFAULT_STEP_TABLE),
        }
    }

    /// Closed-form reference solution, where one exists for the configured boundary data.
    pub fn analytic(&self) -> Option<AnalyticSolution> {
        let k = self.wave.base_k();
        let all_dirichlet_zero = self.bc.iter().all(|b| *b == BoundaryCondition::DirichletZero);
        match self.id {
            ProblemId::Mp1a => Some(AnalyticSolution::PlaneWave { k }),
            ProblemId::Mp1b => self.source.map(|(xs, _)| AnalyticSolution::Greens1d { k, x_src: xs }),
            ProblemId::Mp2a if all_dirichlet_zero => {
                self.source.map(|(xs, ys)| AnalyticSolution::Greens2d { k, x_src: xs, y_src: ys, terms: 1000 })
            }
            _ => None,
        }
    }
}

/// Reference solutions. The 1D Green's function is evaluated in closed form
/// (the series [`greens_1d`] sums to it); the 2D one sums the `x` modes and
/// treats each `y` factor in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnalyticSolution {
    PlaneWave { k: f64 },
    Greens1d { k: f64, x_src: f64 },
    Greens2d { k: f64, x_src: f64, y_src: f64, terms: usize },
}

impl AnalyticSolution {
    pub fn eval(&self, x: f64, y: f64) -> Result<C64> {
        match *self {
            AnalyticSolution::PlaneWave { k } => Ok(exact_mp1a(x, k)),
            AnalyticSolution::Greens1d { k, x_src } => greens_1d_closed(x, x_src, k).map(|v| C64::new(v, 0.0)),
            AnalyticSolution::Greens2d { k, x_src, y_src, terms } => {
                greens_2d_modal(x, y, x_src, y_src, k, terms).map(|v| C64::new(v, 0.0))
            }
        }
    }

    /// Point where the solution is not smooth, if any.
    pub fn singular_point(&self) -> Option<(f64, f64)> {
        match *self {
            AnalyticSolution::PlaneWave { .. } => None,
            AnalyticSolution::Greens1d { x_src, .. } => Some((x_src, 0.0)),
            AnalyticSolution::Greens2d { x_src, y_src, .. } => Some((x_src, y_src)),
        }
    }
}

/// `e^{ikx}`.
pub fn exact_mp1a(x: f64, k: f64) -> C64 {
    C64::from_polar(1.0, k * x)
}

fn check_unit(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutsideDomain(format!("{t}")))
    }
}

const RESONANCE_TOL: f64 = 1e-10;

fn resonance_guard(k2: f64, eigenvalue: f64) -> Result<()> {
    let gap = (eigenvalue - k2).abs();
    if gap < RESONANCE_TOL * k2.max(1.0) {
        return Err(Error::Resonance { k2, eigenvalue, gap });
    }
    Ok(())
}

/// Truncated sine series `2 Σ_{j≤J} sin(jπx) sin(jπx') / (j²π² - k²)`.
pub fn greens_1d(x: f64, x_src: f64, k: f64, terms: usize) -> Result<C64> {
    check_unit(x)?;
    check_unit(x_src)?;
    let k2 = k * k;
    let mut sum = 0.0;
    for j in 1..=terms {
        let jp = j as f64 * PI;
        let lam = jp * jp;
        resonance_guard(k2, lam)?;
        sum += (jp * x).sin() * (jp * x_src).sin() / (lam - k2);
    }
    Ok(C64::new(2.0 * sum, 0.0))
}

/// Closed form of the Dirichlet Green's function of `-d²/dx² - κ²` on `[0, 1]`,
/// valid for any real `κ²` off the Dirichlet spectrum.
pub fn greens_1d_kappa2(x: f64, x_src: f64, kappa2: f64) -> Result<f64> {
    check_unit(x)?;
    check_unit(x_src)?;
    let (lo, hi) = if x <= x_src { (x, x_src) } else { (x_src, x) };
    if kappa2 > 0.0 {
        let kap = kappa2.sqrt();
        let j = (kap / PI).round().max(1.0);
        resonance_guard(kappa2, j * j * PI * PI)?;
        Ok((kap * lo).sin() * (kap * (1.0 - hi)).sin() / (kap * kap.sin()))
    } else if kappa2 == 0.0 {
        Ok(lo * (1.0 - hi))
    } else {
        // sinh(μ lo) sinh(μ (1 - hi)) / (μ sinh μ), written with decaying exponentials
        let mu = (-kappa2).sqrt();
        let num = (-mu * (hi - lo)).exp() - (-mu * (2.0 - hi - lo)).exp() - (-mu * (hi + lo)).exp()
            + (-mu * (2.0 - hi + lo)).exp();
        Ok(num / (2.0 * mu * (1.0 - (-2.0 * mu).exp())))
    }
}

/// Closed form of the 1D Green's function for wave number `k`.
pub fn greens_1d_closed(x: f64, x_src: f64, k: f64) -> Result<f64> {
    greens_1d_kappa2(x, x_src, k * k)
}

/// Truncated double sine series
/// `4 Σ_{i≤I} Σ_{j≤J} sin(iπx) sin(iπx') sin(jπy) sin(jπy') / (i²π² + j²π² - k²)`.
pub fn greens_2d(x: f64, y: f64, x_src: f64, y_src: f64, k: f64, terms_x: usize, terms_y: usize) -> Result<C64> {
    for t in [x, y, x_src, y_src] {
        check_unit(t)?;
    }
    let k2 = k * k;
    let sy: Vec<f64> = (1..=terms_y).map(|j| (j as f64 * PI * y).sin() * (j as f64 * PI * y_src).sin()).collect();
    let mut sum = 0.0;
    for i in 1..=terms_x {
        let ip = i as f64 * PI;
        let sx = (ip * x).sin() * (ip * x_src).sin();
        if sx == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for (j, s) in sy.iter().enumerate() {
            let jp = (j + 1) as f64 * PI;
            let lam = ip * ip + jp * jp;
            resonance_guard(k2, lam)?;
            inner += s / (lam - k2);
        }
        sum += sx * inner;
    }
    Ok(C64::new(4.0 * sum, 0.0))
}

/// The 2D Green's function with the `y` series summed exactly: each `x` mode
/// contributes `2 sin(iπx) sin(iπx') g(y, y'; k² - i²π²)`.
pub fn greens_2d_modal(x: f64, y: f64, x_src: f64, y_src: f64, k: f64, terms: usize) -> Result<f64> {
    check_unit(x)?;
    check_unit(x_src)?;
    let mut sum = 0.0;
    for i in 1..=terms {
        let ip = i as f64 * PI;
        let sx = (ip * x).sin() * (ip * x_src).sin();
        if sx == 0.0 {
            continue;
        }
        sum += sx * greens_1d_kappa2(y, y_src, k * k - ip * ip)?;
    }
    Ok(2.0 * sum)
}

/// Smallest element count with `k / n ≤ kh_target`.
pub fn resolution_for(k: f64, kh_target: f64) -> usize {
    ((k / kh_target) - 1e-9).ceil().max(1.0) as usize
}
