//! Plain-text experiment configuration.
//!
//! ```text
//! # comment
//! name = mp1b-weighted-deflation
//! problem = mp1b
//! k = 100, 1000, 10000
//! p = 1, 2, 3, 4, 5
//! kh = 0.625
//!
//! [preconditioner D_eps]
//! epsilon = 0.15
//!
//! [preconditioner C_ex]
//! beta2 = 1/k
//! ```
//!
//! Top-level keys describe the sweep, each `[preconditioner LABEL]` section
//! one column of the result table. `LABEL` doubles as the preconditioner tag
//! unless a `tag` key overrides it. Any section key can be specialised for a
//! single order with a `.p<n>` suffix, e.g. `nu.p5 = 2`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::Composition;
use crate::error::{Error, Result};
use crate::precond::{PreconditionerSpec, PreconditionerTag, DEFAULT_EPSILON};
use crate::problems::{ProblemId, DEFAULT_STEP_TABLE};

/// A shift `β₂ = scale · k^power`, written `4.2`, `1/k`, `1/(3k)` or `1/k^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shift {
    pub scale: f64,
    pub power: i32,
}

impl Shift {
    pub fn constant(v: f64) -> Self {
        Self { scale: v, power: 0 }
    }

    pub fn at(&self, k: f64) -> f64 {
        self.scale * k.powi(self.power)
    }
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.power {
            0 => write!(f, "{}", self.scale),
            p if p < 0 => {
                let k = if p == -1 { "k".to_string() } else { format!("k^{}", -p) };
                if self.scale == 1.0 {
                    write!(f, "1/{k}")
                } else {
                    write!(f, "1/({}{k})", 1.0 / self.scale)
                }
            }
            p => write!(f, "{}*k^{p}", self.scale),
        }
    }
}

impl FromStr for Shift {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot read shift '{s}' (expected e.g. 4.2, 1/k, 1/(3k), 1/k^2)"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Ok(v) = t.parse::<f64>() {
            return Ok(Shift::constant(v));
        }
        let (num, den) = t.split_once('/').ok_or_else(bad)?;
        let num: f64 = num.parse().map_err(|_| bad())?;
        let den = den.trim_start_matches('(').trim_end_matches(')').replace('*', "");
        let (coef, rest) = match den.find('k') {
            Some(0) => (1.0, &den[..]),
            Some(i) => (den[..i].parse::<f64>().map_err(|_| bad())?, &den[i..]),
            None => return Err(bad()),
        };
        let power = match rest {
            "k" => 1,
            r => r.strip_prefix("k^").and_then(|e| e.parse::<i32>().ok()).ok_or_else(bad)?,
        };
        if coef == 0.0 || power <= 0 {
            return Err(bad());
        }
        Ok(Shift { scale: num / coef, power: -power })
    }
}

/// Settings of one preconditioner column, before specialisation to an order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreconditionerConfig {
    pub label: String,
    pub tag: PreconditionerTag,
    pub epsilon: f64,
    pub beta2: Shift,
    pub cycles: usize,
    pub nu: usize,
    pub omega: f64,
    /// Spectral composition, used by spectrum studies only.
    pub composition: Option<Composition>,
    /// `p ↦ (key ↦ raw value)` overrides.
    pub per_order: BTreeMap<usize, BTreeMap<String, String>>,
}

impl PreconditionerConfig {
    pub fn new(label: &str, tag: PreconditionerTag) -> Self {
        Self {
            label: label.to_string(),
            tag,
            epsilon: DEFAULT_EPSILON,
            beta2: Shift::constant(1.0),
            cycles: 1,
            nu: 1,
            omega: 0.6,
            composition: None,
            per_order: BTreeMap::new(),
        }
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let err = |m: String| Error::Config { line, message: m };
        let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("'{v}' is not a number")));
        let int = |v: &str| v.parse::<usize>().map_err(|_| err(format!("'{v}' is not a count")));
        match key {
            "tag" => self.tag = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "epsilon" => self.epsilon = num(value)?,
            "beta2" => self.beta2 = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "cycles" => self.cycles = int(value)?,
            "nu" => self.nu = int(value)?,
            "omega" => self.omega = num(value)?,
            "composition" => self.composition = Some(value.parse().map_err(|e: Error| err(e.to_string()))?),
            other => {
                let (base, order) = other.rsplit_once(".p").ok_or_else(|| err(format!("unknown preconditioner key '{other}'")))?;
                let p = int(order)?;
                let mut probe = self.clone();
                probe.set(base, value, line)?;
                self.per_order.entry(p).or_default().insert(base.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    /// The settings in force for order `p`.
    pub fn for_order(&self, p: usize) -> PreconditionerConfig {
        let mut out = self.clone();
        if let Some(over) = self.per_order.get(&p) {
            for (key, value) in over {
                out.set(key, value, 0).expect("overrides are validated when parsed");
            }
        }
        out.per_order.clear();
        out
    }

    /// Solver settings at wave number `k` and order `p`.
    pub fn spec(&self, k: f64, p: usize) -> PreconditionerSpec {
        let c = self.for_order(p);
        PreconditionerSpec { tag: c.tag, epsilon: c.epsilon, beta2: c.beta2.at(k), cycles: c.cycles, nu: c.nu, omega: c.omega }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Study {
    Iterations,
    Convergence,
    Pollution,
    Spectrum,
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iterations" => Ok(Study::Iterations),
            "convergence" => Ok(Study::Convergence),
            "pollution" => Ok(Study::Pollution),
            "spectrum" => Ok(Study::Spectrum),
            _ => Err(Error::InvalidArgument(format!("unknown study '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub study: Study,
    pub problem: ProblemId,
    pub ks: Vec<f64>,
    pub ps: Vec<usize>,
    /// Target `kh`; several values only make sense for pollution studies.
    pub kh: Vec<f64>,
    /// Explicit element counts; overrides `kh` when present.
    pub elements: Vec<usize>,
    pub tol: f64,
    pub max_it: usize,
    /// Point-source position in 1D.
    pub source: Option<f64>,
    pub step_table: [[f64; 4]; 4],
    /// Largest system dimension to run; bigger cells are recorded as skipped.
    pub max_n: Option<usize>,
    /// Golden table, relative to the config file.
    pub reference: Option<PathBuf>,
    pub tolerance: u32,
    pub preconditioners: Vec<PreconditionerConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            study: Study::Iterations,
            problem: ProblemId::Mp1b,
            ks: Vec::new(),
            ps: Vec::new(),
            kh: vec![0.625],
            elements: Vec::new(),
            tol: 1e-7,
            max_it: 100,
            source: None,
            step_table: DEFAULT_STEP_TABLE,
            max_n: None,
            reference: None,
            tolerance: 2,
            preconditioners: Vec::new(),
        }
    }
}

fn list<T: FromStr>(value: &str, line: usize) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| Error::Config { line, message: format!("cannot read list entry '{s}'") }))
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut current: Option<PreconditionerConfig> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(head) = body.strip_prefix('[') {
                let head = head
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config { line, message: "unterminated section header".into() })?
                    .trim();
                let label = head
                    .strip_prefix("preconditioner")
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .ok_or_else(|| Error::Config { line, message: format!("unknown section '[{head}]'") })?;
                if let Some(done) = current.take() {
                    cfg.preconditioners.push(done);
                }
                let tag = label.parse().unwrap_or(PreconditionerTag::None);
                current = Some(PreconditionerConfig::new(label, tag));
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config { line, message: format!("expected 'key = value', found '{body}'") })?;
            match current.as_mut() {
                Some(pc) => pc.set(key, value, line)?,
                None => cfg.set(key, value, line)?,
            }
        }
        if let Some(done) = current.take() {
            cfg.preconditioners.push(done);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        if let (Some(r), Some(dir)) = (cfg.reference.as_mut(), path.parent()) {
            if r.is_relative() {
                *r = dir.join(&*r);
            }
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let err = |m: String| Error::Config { line, message: m };
        let one_num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("'{v}' is not a number")));
        match key {
            "name" => self.name = value.to_string(),
            "study" => self.study = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "problem" => self.problem = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "k" => self.ks = list(value, line)?,
            "p" => self.ps = list(value, line)?,
            "kh" => self.kh = list(value, line)?,
            "elements" => self.elements = list(value, line)?,
            "tol" => self.tol = one_num(value)?,
            "max_it" => self.max_it = value.parse().map_err(|_| err(format!("'{value}' is not a count")))?,
            "source" => self.source = Some(one_num(value)?),
            "max_n" => self.max_n = Some(value.parse().map_err(|_| err(format!("'{value}' is not a count")))?),
            "reference" => self.reference = Some(PathBuf::from(value)),
            "tolerance" => self.tolerance = value.parse().map_err(|_| err(format!("'{value}' is not a count")))?,
            "step_table" => {
                let v: Vec<f64> = list(value, line)?;
                if v.len() != 16 {
                    return Err(err(format!("step_table needs 16 values, found {}", v.len())));
                }
                for (i, x) in v.into_iter().enumerate() {
                    self.step_table[i / 4][i % 4] = x;
                }
            }
            other => return Err(err(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let err = |m: &str| Error::Config { line: 0, message: m.to_string() };
        if self.ps.is_empty() {
            return Err(err("no orders given (key 'p')"));
        }
        if self.ps.contains(&0) {
            return Err(err("orders must be at least 1"));
        }
        if self.ks.is_empty() {
            return Err(err("no wave numbers given (key 'k')"));
        }
        if self.ks.iter().any(|k| !k.is_finite() || *k < 0.0) {
            return Err(err("wave numbers must be finite and non-negative"));
        }
        if self.kh.iter().any(|&v| v <= 0.0) {
            return Err(err("kh must be positive"));
        }
        if matches!(self.study, Study::Iterations | Study::Spectrum) && self.preconditioners.is_empty() {
            return Err(err("no [preconditioner ...] section"));
        }
        if let Some(pc) = self.preconditioners.iter().find(|pc| pc.tag == PreconditionerTag::None && pc.label != "none") {
            return Err(Error::Config {
                line: 0,
                message: format!("section '{}' is not a known preconditioner; add a 'tag' key", pc.label),
            });
        }
        if self.study == Study::Spectrum && self.preconditioners.iter().any(|p| p.composition.is_none()) {
            return Err(err("spectrum sections need a 'composition' key"));
        }
        if self.tol <= 0.0 || self.max_it == 0 {
            return Err(err("tol and max_it must be positive"));
        }
        Ok(())
    }

    /// Element count per dimension for wave number `k`: the `kh` resolution
    /// rounded up so that every multigrid level halves cleanly and, for the
    /// layered medium, every layer interface falls on a knot.
    pub fn elements_for(&self, k: f64, kh: f64) -> usize {
        let multiple = if self.problem == ProblemId::Mp2b { 4 } else { 2 };
        crate::problems::resolution_for(k, kh).div_ceil(multiple) * multiple
    }

    /// Canonical text form; identical configurations give identical text.
    pub fn canonical(&self) -> String {
        let mut copy = self.clone();
        copy.reference = None;
        serde_json::to_string(&copy).expect("config serializes")
    }

    /// FNV-1a hash of [`Self::canonical`], as 16 hex digits.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical().bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}
