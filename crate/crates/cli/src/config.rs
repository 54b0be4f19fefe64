//! Run configuration.
//!
//! Grammar is TOML: blank lines and `#` comments are ignored, a line
//! `[section]` opens a section, and every other line is `key = value` where a
//! value is a number, a quoted string, a boolean or a `[a, b, ...]` list.
//! Keys may also be written fully dotted (`solver.tol_final = 1e-9`).
//! Unknown sections or keys are rejected. Every error names the offending line.

use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub domain: DomainCfg,
    pub bundle: BundleCfg,
    pub solver: SolverCfg,
    pub donaldson: DonaldsonCfg,
    pub analysis: AnalysisCfg,
    pub poincare: PoincareCfg,
    pub io: IoCfg,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainCfg {
    /// `torus` or `cylinder`.
    pub kind: String,
    pub n: usize,
    /// One length per real axis; for a cylinder the first is its length.
    pub lengths: Option<Vec<f64>>,
    /// One point count per real axis.
    pub points: Option<Vec<usize>>,
}

impl Default for DomainCfg {
    fn default() -> Self {
        DomainCfg { kind: "torus".into(), n: 1, lengths: None, points: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BundleCfg {
    pub rank: usize,
    /// `none` or `heisenberg`.
    pub twist: String,
    /// Amplitude of the random perturbation of the flat reference metric.
    pub perturbation: f64,
    pub modes: i32,
    /// Gauged curvature route: `direct` or `formula`.
    pub route: String,
}

impl Default for BundleCfg {
    fn default() -> Self {
        BundleCfg { rank: 2, twist: "none".into(), perturbation: 0.02, modes: 1, route: "direct".into() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverCfg {
    pub tol_path: f64,
    pub tol_final: f64,
    pub t_schedule: Vec<f64>,
    pub t_min: f64,
    pub max_iters: usize,
    pub linear: String,
    pub max_linear_iters: usize,
    pub dt_min: f64,
}

impl Default for SolverCfg {
    fn default() -> Self {
        let c = phym::solver::ContinuationConfig::default();
        SolverCfg {
            tol_path: c.tol_path,
            tol_final: c.tol_final,
            t_schedule: c.t_schedule,
            t_min: c.t_min,
            max_iters: c.max_iters,
            linear: c.linear_solver,
            max_linear_iters: c.max_linear_iters,
            dt_min: c.dt_min,
        }
    }
}

impl SolverCfg {
    pub fn continuation(&self) -> phym::solver::ContinuationConfig {
        phym::solver::ContinuationConfig {
            tol_path: self.tol_path,
            tol_final: self.tol_final,
            t_schedule: self.t_schedule.clone(),
            t_min: self.t_min,
            max_iters: self.max_iters,
            linear_solver: self.linear.clone(),
            max_linear_iters: self.max_linear_iters,
            dt_min: self.dt_min,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DonaldsonCfg {
    pub quad: usize,
    /// Amplitude of the random direction `s`.
    pub amplitude: f64,
    /// Points of the `u ∈ [0, 1]` convexity scan.
    pub scan: usize,
    /// Allowed relative additivity defect.
    pub additivity_tol: f64,
}

impl Default for DonaldsonCfg {
    fn default() -> Self {
        DonaldsonCfg { quad: 12, amplitude: 0.3, scan: 11, additivity_tol: 1e-8 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisCfg {
    /// `random` samples a smooth field; `solve` runs the continuation first.
    pub source: String,
    /// Amplitude of the random field when `source = "random"`.
    pub amplitude: f64,
    pub p: f64,
    pub lambda: f64,
    pub alpha: f64,
    /// Outer radius of the Green iteration; defaults to the injectivity
    /// radius, capped at half the shortest side.
    pub r_max: Option<f64>,
    /// Fit window along the cylinder; defaults to `[5L/12, 5L/6]`.
    pub window: Option<Vec<f64>>,
}

impl Default for AnalysisCfg {
    fn default() -> Self {
        AnalysisCfg { source: "random".into(), amplitude: 0.5, p: 2.0, lambda: 3.0, alpha: 0.5, r_max: None, window: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoincareCfg {
    pub n: usize,
    pub sigma: f64,
    pub epsilons: Vec<f64>,
    pub annulus: Vec<f64>,
    pub points: usize,
    /// Allowed sup/inf ratio of the bounds across the sweep.
    pub max_spread: f64,
}

impl Default for PoincareCfg {
    fn default() -> Self {
        PoincareCfg {
            n: 3,
            sigma: 0.1,
            epsilons: (0..7).map(|k| 0.5f64.powi(k)).collect(),
            annulus: vec![0.5, 2.0],
            points: 61,
            max_spread: 3.0,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoCfg {
    /// Zero disables field dumps; any positive value dumps the final field.
    pub dump_every: usize,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Line declaring `section.key` (or the section header when `key` is empty).
pub fn locate(text: &str, dotted: &str) -> Option<usize> {
    let (section, key) = dotted.rsplit_once('.').unwrap_or(("", dotted));
    let mut current = String::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else { continue };
        let lhs = lhs.trim();
        let full = if current.is_empty() { lhs.to_string() } else { format!("{current}.{lhs}") };
        if full == dotted || (section.is_empty() && current.is_empty() && lhs == key) {
            return Some(no + 1);
        }
    }
    None
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str::<RunConfig>(text).map_err(|e| ConfigError {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })
}

impl RunConfig {
    /// Semantic checks the schema cannot express.
    pub fn validate(&self, text: &str) -> Result<(), ConfigError> {
        let err = |key: &str, message: String| ConfigError { line: locate(text, key), message: format!("{key}: {message}") };
        if !matches!(self.domain.kind.as_str(), "torus" | "cylinder") {
            return Err(err("domain.kind", format!("expected 'torus' or 'cylinder', got '{}'", self.domain.kind)));
        }
        if self.domain.n == 0 || self.domain.n > 3 {
            return Err(err("domain.n", "complex dimension must be 1, 2 or 3".into()));
        }
        let axes = 2 * self.domain.n;
        if let Some(l) = &self.domain.lengths {
            if l.len() != axes || l.iter().any(|&x| !(x > 0.0)) {
                return Err(err("domain.lengths", format!("need {axes} positive lengths")));
            }
        }
        if let Some(p) = &self.domain.points {
            if p.len() != axes || p.iter().any(|&x| x < 4) {
                return Err(err("domain.points", format!("need {axes} counts of at least 4")));
            }
        }
        if self.bundle.rank == 0 || self.bundle.rank > phym::matcalc::MAX_RANK {
            return Err(err("bundle.rank", format!("rank must lie in 1..={}", phym::matcalc::MAX_RANK)));
        }
        if !matches!(self.bundle.twist.as_str(), "none" | "heisenberg") {
            return Err(err("bundle.twist", format!("expected 'none' or 'heisenberg', got '{}'", self.bundle.twist)));
        }
        if !matches!(self.bundle.route.as_str(), "direct" | "formula") {
            return Err(err("bundle.route", format!("expected 'direct' or 'formula', got '{}'", self.bundle.route)));
        }
        if !(self.bundle.perturbation >= 0.0) {
            return Err(err("bundle.perturbation", "must be non-negative".into()));
        }
        let s = &self.solver;
        for (k, v) in [("solver.tol_path", s.tol_path), ("solver.tol_final", s.tol_final), ("solver.dt_min", s.dt_min)] {
            if !(v > 0.0) {
                return Err(err(k, "must be positive".into()));
            }
        }
        if s.t_schedule.windows(2).any(|w| !(w[1] < w[0])) || s.t_schedule.iter().any(|&t| !(0.0..1.0).contains(&t)) {
            return Err(err("solver.t_schedule", "must be strictly decreasing values in [0, 1)".into()));
        }
        if !s.t_schedule.is_empty() && *s.t_schedule.last().unwrap() != 0.0 {
            return Err(err("solver.t_schedule", "must end at 0".into()));
        }
        if !phym::solver::linear_solver_registry().contains_key(s.linear.as_str()) {
            return Err(err("solver.linear", format!("unknown linear solver '{}'", s.linear)));
        }
        if self.donaldson.quad < 4 {
            return Err(err("donaldson.quad", "need at least 4 nodes".into()));
        }
        if self.donaldson.scan < 3 {
            return Err(err("donaldson.scan", "need at least 3 scan points".into()));
        }
        let a = &self.analysis;
        if !matches!(a.source.as_str(), "random" | "solve") {
            return Err(err("analysis.source", format!("expected 'random' or 'solve', got '{}'", a.source)));
        }
        if !(a.p >= 1.0) {
            return Err(err("analysis.p", "must be at least 1".into()));
        }
        if !(a.lambda >= 0.0) {
            return Err(err("analysis.lambda", "must be non-negative".into()));
        }
        if !(a.alpha > 0.0 && a.alpha <= 1.0) {
            return Err(err("analysis.alpha", "must lie in (0, 1]".into()));
        }
        if let Some(w) = &a.window {
            if w.len() != 2 || !(w[0] < w[1]) {
                return Err(err("analysis.window", "need [lo, hi] with lo < hi".into()));
            }
        }
        let p = &self.poincare;
        if p.n == 0 {
            return Err(err("poincare.n", "must be positive".into()));
        }
        if p.epsilons.is_empty() || p.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(err("poincare.epsilons", "need at least one positive value".into()));
        }
        if p.annulus.len() != 2 || !(0.0 < p.annulus[0] && p.annulus[0] < p.annulus[1]) {
            return Err(err("poincare.annulus", "need [r_in, r_out] with 0 < r_in < r_out".into()));
        }
        if !(p.max_spread >= 1.0) {
            return Err(err("poincare.max_spread", "must be at least 1".into()));
        }
        Ok(())
    }
}
