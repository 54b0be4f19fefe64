//! Continuity method for `𝔏(s, t) = 𝔎(s) + t·s = 0`, driven from `t = 1` to
//! `t = 0`, plus the line-bundle invariant and cross-section spectral gaps.
//!
//! Newton steps use finite-difference Jacobian-vector products of the exact
//! residual and a Fourier-preconditioned Krylov solve.

mod gap;
mod line_bundle;
pub mod linear;
mod precond;

pub use gap::spectral_gap;
pub use line_bundle::{line_bundle_invariant, line_curvature, smoothed_ell, LineBundleProblem, LineBundleSolution};
pub use linear::{linear_solver_registry, BiCgStab, Gmres, LinearReport, LinearSolver};
pub use precond::FourierPreconditioner;

use crate::error::{PhymError, Result};
use crate::fields::{gauged_curvature_registry, rough_laplacian_with, EndoField, GaugedCurvature, Reference};
use crate::geometry::GridDomain;
use crate::matcalc::{AdSpectrum, CMat};
use serde::Serialize;

/// A continuity problem: reference metric, evaluation route and clamped sites.
pub struct Problem {
    reference: Reference,
    route: Box<dyn GaugedCurvature>,
    clamped: Vec<bool>,
}

impl Problem {
    /// Sites on non-periodic end faces are clamped to `s = 0`.
    pub fn new(reference: Reference, route: &str) -> Result<Self> {
        let route = gauged_curvature_registry()
            .remove(route)
            .ok_or_else(|| PhymError::Config(format!("unknown curvature route '{route}'")))?;
        let d = reference.domain();
        let clamped = (0..d.len()).map(|i| d.on_boundary(i)).collect();
        Ok(Problem { reference, route, clamped })
    }

    pub fn reference(&self) -> &Reference {
        &self.reference
    }

    pub fn domain(&self) -> &GridDomain {
        self.reference.domain()
    }

    pub fn rank(&self) -> usize {
        self.reference.rank()
    }

    pub fn is_clamped(&self, idx: usize) -> bool {
        self.clamped[idx]
    }

    pub fn gauged_curvature(&self, s: &[CMat]) -> Result<EndoField> {
        self.route.eval(&self.reference, s)
    }

    /// `𝔏(s, t) = 𝔎(s) + t·s`; on clamped sites the residual is `s` itself.
    pub fn l_map(&self, s: &[CMat], t: f64) -> Result<EndoField> {
        let k = self.gauged_curvature(s)?;
        Ok((0..s.len()).map(|i| if self.clamped[i] { s[i] } else { k[i] + s[i] * t }).collect())
    }

    /// Analytic linearization
    /// `L_{s,t}ĥ = ½∇*_Ã∇_Ã Ad(e^{s/2})Υ(−s)ĥ + [ψ(ad_s)ĥ, 𝔎(s)] + tĥ`
    /// with `Ã_{k} = A_k + ½Υ(−s/2)∇_k s` and `ψ(g) = (cosh(g/2) − 1)/g`.
    /// The commutator term vanishes where `𝔎(s) = 0`.
    pub fn linearized_apply(&self, s: &[CMat], t: f64, hat: &[CMat]) -> Result<EndoField> {
        let d = self.domain();
        let n = s.len();
        let spec: Vec<AdSpectrum> = s.iter().map(AdSpectrum::new).collect();
        let sigma: EndoField = (0..n).map(|i| spec[i].apply(crate::matcalc::theta_symbol, &hat[i])).collect();
        let base = self.reference.connection();
        let i_unit = crate::matcalc::C64::new(0.0, 1.0);
        let mut conn = vec![Vec::new(); d.dim];
        for k in 0..d.n() {
            let ds = self.reference.nabla_complex(s, k, -1.0);
            let bk: EndoField = (0..n)
                .map(|i| {
                    let ak = (base[2 * k][i] - base[2 * k + 1][i].scale_c(i_unit)) * 0.5;
                    ak + spec[i].apply(|g| crate::matcalc::phi(-0.5 * g), &ds[i]) * 0.5
                })
                .collect();
            conn[2 * k] = bk.iter().map(|b| *b - b.adjoint()).collect();
            conn[2 * k + 1] = bk.iter().map(|b| (*b + b.adjoint()).scale_c(i_unit)).collect();
        }
        let conn_div: Vec<EndoField> = (0..d.dim).map(|a| d.deriv(&conn[a], a)).collect();
        let lap = rough_laplacian_with(d, &conn, &conn_div, &sigma);
        let kk = self.gauged_curvature(s)?;
        Ok((0..n)
            .map(|i| {
                if self.clamped[i] {
                    return hat[i];
                }
                let u = spec[i].apply(psi, &hat[i]);
                (lap[i] * 0.5 + u.commutator(&kk[i]) + hat[i] * t).herm_part().traceless()
            })
            .collect())
    }

    /// `∫|X|²` with the domain quadrature weights.
    pub fn l2_sqr(&self, x: &[CMat]) -> f64 {
        let d = self.domain();
        d.integrate(&x.iter().map(|m| m.norm_sqr()).collect::<Vec<_>>())
    }
}

fn psi(g: f64) -> f64 {
    if g.abs() < 1e-4 {
        g / 8.0 * (1.0 + g * g / 48.0)
    } else {
        ((0.5 * g).cosh() - 1.0) / g
    }
}

pub fn sup_norm(x: &[CMat]) -> f64 {
    x.iter().map(|m| m.norm()).fold(0.0, f64::max)
}

fn project(x: EndoField) -> EndoField {
    x.into_iter().map(|m| m.herm_part().traceless()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationConfig {
    pub tol_path: f64,
    pub tol_final: f64,
    /// Explicit decreasing `t` values; empty means the default schedule
    /// `t ← max(t/2, t − 0.1)` down to `t_min`, then `0`.
    pub t_schedule: Vec<f64>,
    pub t_min: f64,
    pub max_iters: usize,
    pub linear_solver: String,
    pub max_linear_iters: usize,
    /// Smallest admissible step in `t` after repeated halving.
    pub dt_min: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            tol_path: 1e-10,
            tol_final: 1e-9,
            t_schedule: Vec::new(),
            t_min: 1e-3,
            max_iters: 12,
            linear_solver: "gmres".into(),
            max_linear_iters: 400,
            dt_min: 1e-6,
        }
    }
}

impl ContinuationConfig {
    pub fn schedule(&self) -> Vec<f64> {
        if !self.t_schedule.is_empty() {
            return self.t_schedule.clone();
        }
        let mut out = Vec::new();
        let mut t: f64 = 1.0;
        while t >= self.t_min {
            t = (t / 2.0).max(t - 0.1);
            if t >= self.t_min {
                out.push(t);
            }
        }
        out.push(0.0);
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub newton_iters: usize,
    pub linear_iters: usize,
    /// `t²∫|s|²`
    pub energy_s: f64,
    /// `∫|𝔎(s)|² = ∫|K_{H₀e^s}|²`
    pub energy_k: f64,
}

#[derive(Clone, Debug)]
pub struct ContinuationState {
    pub s: EndoField,
    pub t: f64,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub log: Vec<StepRecord>,
    /// `t` values rejected before halving.
    pub rejected: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct NewtonReport {
    pub iterations: usize,
    pub linear_iterations: usize,
    pub residual_sup: f64,
    pub residual_l2: f64,
    pub history: Vec<f64>,
}

/// Damped inexact Newton for `𝔏(·, t) = 0`.
pub struct NewtonSolver<'a> {
    problem: &'a Problem,
    linear: Box<dyn LinearSolver>,
    pre: FourierPreconditioner,
    cfg: ContinuationConfig,
}

impl<'a> NewtonSolver<'a> {
    pub fn new(problem: &'a Problem, cfg: ContinuationConfig) -> Result<Self> {
        let linear = linear_solver_registry()
            .remove(cfg.linear_solver.as_str())
            .ok_or_else(|| PhymError::Config(format!("unknown linear solver '{}'", cfg.linear_solver)))?;
        let pre = FourierPreconditioner::new(problem.domain(), problem.rank(), 1.0)?;
        Ok(NewtonSolver { problem, linear, pre, cfg })
    }

    /// Runs Newton from `s0` until `‖𝔏‖_∞ ≤ tol`.
    pub fn solve(&mut self, s0: &[CMat], t: f64, tol: f64) -> Result<(EndoField, NewtonReport)> {
        let p = self.problem;
        self.pre.set_shift(t.max(1e-2));
        let mut s = s0.to_vec();
        let mut f = p.l_map(&s, t)?;
        let mut res = sup_norm(&f);
        let mut history = vec![res];
        let mut lin_total = 0;
        let mut it = 0;
        while res > tol {
            if it == self.cfg.max_iters {
                return Err(PhymError::NonConvergence(format!(
                    "Newton at t = {t} stalled at residual {res:.3e} after {it} iterations"
                )));
            }
            it += 1;
            let s_sup = sup_norm(&s);
            let mut jv = |v: &[CMat]| -> Result<EndoField> {
                let vs = sup_norm(v);
                if vs == 0.0 {
                    return Ok(vec![CMat::zeros(p.rank()); v.len()]);
                }
                // central differences: the 1/h² roundoff in 𝔏 rules out tiny steps
                let eps = 1e-4 * (1.0 + s_sup) / vs;
                let plus: EndoField = s.iter().zip(v).map(|(a, b)| *a + *b * eps).collect();
                let minus: EndoField = s.iter().zip(v).map(|(a, b)| *a - *b * eps).collect();
                let fp = p.l_map(&plus, t)?;
                let fm = p.l_map(&minus, t)?;
                Ok(fp.iter().zip(&fm).map(|(a, b)| (*a - *b) * (0.5 / eps)).collect())
            };
            let rhs: EndoField = f.iter().map(|m| -*m).collect();
            let forcing = (0.1 * res).clamp(1e-8, 1e-2);
            let pre = &self.pre;
            let rep = self.linear.solve(&mut jv, &|x: &[CMat]| pre.apply(x), &rhs, forcing, self.cfg.max_linear_iters)?;
            lin_total += rep.iterations;
            let dir = project(rep.x);
            let f2 = linear::norm(&f);
            let mut lambda = 1.0;
            loop {
                let trial: EndoField = project(s.iter().zip(&dir).map(|(a, b)| *a + *b * lambda).collect());
                let ft = p.l_map(&trial, t)?;
                if linear::norm(&ft) < (1.0 - 1e-4 * lambda) * f2 || lambda < 1.0 / 64.0 {
                    if lambda < 1.0 / 64.0 && linear::norm(&ft) >= f2 {
                        return Err(PhymError::NonConvergence(format!(
                            "line search failed at t = {t}, residual {res:.3e}"
                        )));
                    }
                    s = trial;
                    f = ft;
                    break;
                }
                lambda *= 0.5;
            }
            res = sup_norm(&f);
            history.push(res);
        }
        let l2 = p.l2_sqr(&f).sqrt();
        Ok((s, NewtonReport { iterations: it, linear_iterations: lin_total, residual_sup: res, residual_l2: l2, history }))
    }
}

/// Lübke–Teleman seed: from a reference `H₋₁` with `κ = K_{H₋₁}` build
/// `H₀ = H₋₁e^κ`; then `s₁ = −κ` (in the frame of `H₀`) solves `𝔏(s₁, 1) = 0`.
pub struct Seed {
    pub reference: Reference,
    pub s1: EndoField,
    pub kappa: EndoField,
}

pub fn lubke_teleman_seed(domain: &GridDomain, p_minus1: EndoField) -> Result<Seed> {
    let r_minus1 = Reference::new(domain, p_minus1.clone())?;
    let kappa = r_minus1.k0().to_vec();
    let (g, _) = r_minus1.frame();
    let p0: EndoField = (0..domain.len()).map(|i| g[i] * AdSpectrum::new(&kappa[i]).func(f64::exp) * g[i]).collect();
    let reference = Reference::new(domain, p0)?;
    let s1 = project(reference.state_of(&p_minus1));
    Ok(Seed { reference, s1, kappa })
}

/// Drives `t` from 1 to 0 along the schedule, halving steps that fail.
pub fn continuation_solve(problem: &Problem, s1: &[CMat], cfg: &ContinuationConfig) -> Result<ContinuationState> {
    let mut newton = NewtonSolver::new(problem, cfg.clone())?;
    let record = |s: &[CMat], t: f64, rep: &NewtonReport| StepRecord {
        t,
        residual_sup: rep.residual_sup,
        residual_l2: rep.residual_l2,
        newton_iters: rep.iterations,
        linear_iters: rep.linear_iterations,
        energy_s: t * t * problem.l2_sqr(s),
        energy_k: 0.0,
    };
    let (mut s, rep) = newton.solve(s1, 1.0, cfg.tol_path)?;
    let mut log = vec![record(&s, 1.0, &rep)];
    log[0].energy_k = problem.l2_sqr(&problem.gauged_curvature(&s)?);
    let mut rejected = Vec::new();
    let mut t = 1.0;
    for target in cfg.schedule() {
        while t > target {
            let mut try_t = target;
            loop {
                let tol = if try_t == 0.0 { cfg.tol_final.min(cfg.tol_path) } else { cfg.tol_path };
                match newton.solve(&s, try_t, tol) {
                    Ok((s_new, rep)) => {
                        s = s_new;
                        t = try_t;
                        let mut rec = record(&s, t, &rep);
                        rec.energy_k = problem.l2_sqr(&problem.gauged_curvature(&s)?);
                        log.push(rec);
                        break;
                    }
                    Err(PhymError::NonConvergence(msg)) => {
                        rejected.push(try_t);
                        let dt = (t - try_t) / 2.0;
                        if dt < cfg.dt_min {
                            return Err(PhymError::NonConvergence(format!(
                                "step in t fell below {} near t = {t}: {msg}",
                                cfg.dt_min
                            )));
                        }
                        try_t = t - dt;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let last = log.last().expect("at least one record");
    Ok(ContinuationState { residual_sup: last.residual_sup, residual_l2: last.residual_l2, s, t, log, rejected })
}

/// `‖K_{H₀e^s}‖_∞`, measured as `‖𝔎(s)‖_∞` (the conjugation is an isometry
/// from the `H`-norm to the Frobenius norm), over unclamped sites.
pub fn final_curvature_sup(problem: &Problem, s: &[CMat]) -> Result<f64> {
    let k = problem.gauged_curvature(s)?;
    Ok((0..s.len()).filter(|&i| !problem.is_clamped(i)).map(|i| k[i].norm()).fold(0.0, f64::max))
}
