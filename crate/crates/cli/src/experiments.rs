//! Experiments are strategies looked up by name in a registry.

use crate::config::RunConfig;
use crate::report::{Assertion, Outcome};
use phym::analysis::{
    campanato_seminorm, decay_fit_window, green_dyadic_iteration, holder_from_campanato, morrey_norm, phi_growth_on, SampledFunction,
};
use phym::donaldson::{donaldson_between, donaldson_m, upper_bound_check};
use phym::fields::{heisenberg_pair, Reference, TwistBasis};
use phym::geometry::{write_dump, CylinderParams, DomainKind, DumpHeader, GridDomain};
use phym::matcalc::{exp_herm, CMat};
use phym::poincare::blowup_sweep;
use phym::solver::{continuation_solve, final_curvature_sup, lubke_teleman_seed, ContinuationState, Problem};
use phym::{PhymError, Result};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub rng: ChaCha8Rng,
}

pub trait Experiment {
    fn name(&self) -> &'static str;
    /// Whether the run draws from the seeded generator.
    fn randomized(&self) -> bool;
    fn run(&self, ctx: &mut Context, out: &mut Outcome) -> Result<()>;
}

pub fn registry() -> BTreeMap<&'static str, Box<dyn Experiment>> {
    let all: Vec<Box<dyn Experiment>> =
        vec![Box::new(Solve), Box::new(Donaldson), Box::new(Norms), Box::new(Decay), Box::new(Poincare), Box::new(crate::verify::Verify)];
    all.into_iter().map(|e| (e.name(), e)).collect()
}

pub const NAMES: [&str; 6] = ["solve", "donaldson", "norms", "decay", "poincare", "verify"];

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let io = |e: csv::Error| PhymError::Numeric(format!("writing {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| PhymError::Numeric(format!("writing {}: {e}", path.display())))
}

fn csv_out<T: Serialize>(ctx: &Context, out: &mut Outcome, name: &str, rows: &[T]) -> Result<()> {
    write_csv(&ctx.out.join(name), rows)?;
    out.files.push(name.to_string());
    Ok(())
}

/// Domain described by the config, with cylinder defaults matching a
/// twisted `S¹ × T²` cross-section when `n = 2`.
pub fn build_domain(cfg: &RunConfig) -> Result<GridDomain> {
    let n = cfg.domain.n;
    let axes = 2 * n;
    let rank = cfg.bundle.rank;
    let heis = cfg.bundle.twist == "heisenberg";
    let d = match cfg.domain.kind.as_str() {
        "torus" => {
            let lengths = cfg.domain.lengths.clone().unwrap_or_else(|| vec![1.0; axes]);
            let points = cfg.domain.points.clone().unwrap_or_else(|| vec![32; axes]);
            GridDomain::torus(n, &lengths, &points)?
        }
        _ => {
            let lengths = cfg.domain.lengths.clone().unwrap_or_else(|| {
                let mut l = vec![6.0, 1.0];
                l.extend(std::iter::repeat(2.0).take(axes - 2));
                l
            });
            let points = cfg.domain.points.clone().unwrap_or_else(|| {
                let mut p = vec![49, if n == 1 { 16 } else { 4 }];
                p.extend(std::iter::repeat(8).take(axes - 2));
                p
            });
            let params = CylinderParams { length: lengths[0], delta_v: 1.0, delta_e: 1.0, delta_h: 1.0 };
            GridDomain::cylinder(n, params, &lengths[1..], &points)?
        }
    };
    if !heis {
        return Ok(d);
    }
    // the twist pair sits on the last two periodic axes
    if d.kind == DomainKind::Cylinder && n < 2 {
        return Err(PhymError::Config("a Heisenberg twist on a cylinder needs n >= 2".into()));
    }
    let (u, v) = heisenberg_pair(rank);
    let mut twist = vec![None; axes];
    twist[axes - 2] = Some(u);
    twist[axes - 1] = Some(v);
    d.with_twist(twist)
}

fn random_field(cfg: &RunConfig, d: &GridDomain, rng: &mut ChaCha8Rng, amp: f64) -> Result<Vec<CMat>> {
    Ok(TwistBasis::new(d, cfg.bundle.rank)?.random_field(d, rng, cfg.bundle.modes, amp))
}

/// Perturbed flat metric; on a cylinder the perturbation is confined to
/// `ℓ ∈ [L/24, 3L/8]` so the far end stays translation-invariant.
fn perturbed_metric(cfg: &RunConfig, d: &GridDomain, rng: &mut ChaCha8Rng) -> Result<Vec<CMat>> {
    let field = random_field(cfg, d, rng, cfg.bundle.perturbation)?;
    if d.kind != DomainKind::Cylinder {
        return Ok(field.iter().map(exp_herm).collect());
    }
    let l = d.lengths[0];
    let (a, b) = (l / 24.0, 3.0 * l / 8.0);
    Ok((0..d.len())
        .map(|i| {
            let x = d.position(i)[0];
            let w = if (a..b).contains(&x) { (PI * (x - a) / (b - a)).sin().powi(2) } else { 0.0 };
            exp_herm(&(field[i] * w))
        })
        .collect())
}

pub struct Solved {
    pub domain: GridDomain,
    pub state: ContinuationState,
}

/// Seed, continuation run and the standard solve assertions.
fn solve_common(ctx: &mut Context, out: &mut Outcome) -> Result<Solved> {
    let cfg = ctx.cfg.clone();
    let d = build_domain(&cfg)?;
    let p_minus1 = perturbed_metric(&cfg, &d, &mut ctx.rng)?;
    let seed = lubke_teleman_seed(&d, p_minus1)?;
    let problem = Problem::new(seed.reference, &cfg.bundle.route)?;
    // clamped far-face sites carry boundary data, not the equation
    let l1 = problem.l_map(&seed.s1, 1.0)?;
    let seed_residual = (0..d.len()).filter(|&i| !problem.is_clamped(i)).map(|i| l1[i].norm()).fold(0.0, f64::max);
    let state = continuation_solve(&problem, &seed.s1, &cfg.solver.continuation())?;
    let final_k = final_curvature_sup(&problem, &state.s)?;
    let gap = state
        .log
        .iter()
        .map(|r| (r.energy_s - r.energy_k).abs() / r.energy_k.max(r.energy_s).max(1e-16))
        .fold(0.0, f64::max);
    out.metric("sites", json!(d.len()));
    out.metric("seed_residual", json!(seed_residual));
    out.metric("final_curvature_sup", json!(final_k));
    out.metric("final_residual_l2", json!(state.residual_l2));
    out.metric("accepted_steps", json!(state.log.len()));
    out.metric("rejected_t", json!(state.rejected));
    out.metric("newton_iterations", json!(state.log.iter().map(|r| r.newton_iters).sum::<usize>()));
    out.metric("path_identity_gap", json!(gap));
    out.check(Assertion::at_most("seed_identity", seed_residual, 1e-10));
    out.check(Assertion::at_most("final_curvature", final_k, cfg.solver.tol_final));
    if d.kind == DomainKind::Torus {
        out.check(Assertion::at_most("path_identity", gap, 1e-6));
    }
    if cfg.io.dump_every > 0 {
        let path = ctx.out.join("s.dump");
        let file = std::fs::File::create(&path).map_err(|e| PhymError::Numeric(format!("{}: {e}", path.display())))?;
        write_dump(std::io::BufWriter::new(file), &DumpHeader::for_matrices(&d, cfg.bundle.rank), &state.s)?;
        out.files.push("s.dump".into());
    }
    Ok(Solved { domain: d, state })
}

pub struct Solve;

impl Experiment for Solve {
    fn name(&self) -> &'static str {
        "solve"
    }
    fn randomized(&self) -> bool {
        true
    }
    fn run(&self, ctx: &mut Context, out: &mut Outcome) -> Result<()> {
        let solved = solve_common(ctx, out)?;
        csv_out(ctx, out, "path.csv", &solved.state.log)
    }
}

pub struct Donaldson;

#[derive(Serialize)]
struct URow {
    u: f64,
    integrand: f64,
}

#[derive(Serialize)]
struct ScanRow {
    u: f64,
    m: f64,
}

impl Experiment for Donaldson {
    fn name(&self) -> &'static str {
        "donaldson"
    }
    fn randomized(&self) -> bool {
        true
    }
    fn run(&self, ctx: &mut Context, out: &mut Outcome) -> Result<()> {
        let cfg = ctx.cfg.clone();
        let dc = &cfg.donaldson;
        let d = build_domain(&cfg)?;
        let p0 = perturbed_metric(&cfg, &d, &mut ctx.rng)?;
        let reference = Reference::new(&d, p0.clone())?;
        let s = random_field(&cfg, &d, &mut ctx.rng, dc.amplitude)?;
        let eval = donaldson_m(&reference, &s, dc.quad)?;
        let rows: Vec<URow> = eval.path.iter().map(|&(u, integrand)| URow { u, integrand }).collect();
        csv_out(ctx, out, "donaldson.csv", &rows)?;

        let scan: Vec<ScanRow> = (0..dc.scan)
            .map(|k| {
                let u = k as f64 / (dc.scan - 1) as f64;
                let us: Vec<CMat> = s.iter().map(|m| *m * u).collect();
                Ok(ScanRow { u, m: donaldson_m(&reference, &us, dc.quad)?.value })
            })
            .collect::<Result<_>>()?;
        let min_second = scan.windows(3).map(|w| w[0].m - 2.0 * w[1].m + w[2].m).fold(f64::INFINITY, f64::min);
        csv_out(ctx, out, "scan.csv", &scan)?;

        let s2 = random_field(&cfg, &d, &mut ctx.rng, dc.amplitude)?;
        let p1 = reference.metric(&s);
        let p2 = reference.metric(&s2);
        let m02 = donaldson_between(&d, &p0, &p2, dc.quad)?;
        let m01 = donaldson_between(&d, &p0, &p1, dc.quad)?;
        let m12 = donaldson_between(&d, &p1, &p2, dc.quad)?;
        let gap = (m02 - m01 - m12).abs() / m02.abs().max(1.0);
        let ub = upper_bound_check(&reference, &s, dc.quad)?;

        out.metric("m", json!(eval.value));
        out.metric("quad_nodes", json!(eval.quad_nodes));
        out.metric("convexity_min_second_difference", json!(min_second));
        out.metric("additivity", json!({"m02": m02, "m01": m01, "m12": m12, "relative_gap": gap}));
        out.metric("upper_bound", json!(ub));
        out.check(Assertion::at_least("convexity", min_second, -1e-9));
        out.check(Assertion::at_most("additivity", gap, dc.additivity_tol));
        Ok(())
    }
}

pub struct Norms;

#[derive(Serialize)]
struct PhiRow {
    r: f64,
    phi: f64,
}

#[derive(Serialize)]
struct GreenRow {
    r: f64,
    f: f64,
}

/// Hölder over Campanato ratio accepted on smooth corpora.
const HOLDER_CONSTANT: f64 = 4.0;

impl Experiment for Norms {
    fn name(&self) -> &'static str {
        "norms"
    }
    fn randomized(&self) -> bool {
        true
    }
    fn run(&self, ctx: &mut Context, out: &mut Outcome) -> Result<()> {
        let cfg = ctx.cfg.clone();
        let a = &cfg.analysis;
        let (d, s) = if a.source == "solve" {
            let solved = solve_common(ctx, out)?;
            (solved.domain, solved.state.s)
        } else {
            let d = build_domain(&cfg)?;
            let s = random_field(&cfg, &d, &mut ctx.rng, a.amplitude)?;
            (d, s)
        };
        let f = SampledFunction::from_hermitian(&d, &s)?;
        let morrey = morrey_norm(&f, a.p, a.lambda)?;
        let campanato = campanato_seminorm(&f, a.p, a.lambda)?;
        let holder = holder_from_campanato(&f, a.alpha)?;
        // dyadic ladder from two cells up to half the injectivity radius
        let hmax = d.h.iter().cloned().fold(0.0, f64::max);
        let top = 0.5 * d.injectivity_radius().min(d.lengths.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0);
        let radii: Vec<f64> = (1..).map(|j| hmax * 2f64.powi(j)).take_while(|&r| r <= top * (1.0 + 1e-12)).collect();
        let phi = phi_growth_on(&f, &radii)?;
        let rows: Vec<PhiRow> = phi.radii.iter().zip(&phi.phi).map(|(&r, &phi)| PhiRow { r, phi }).collect();
        csv_out(ctx, out, "phi.csv", &rows)?;
        let r_max = a.r_max.unwrap_or_else(|| d.injectivity_radius().min(d.lengths.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0));
        let green = green_dyadic_iteration(&d, &s, 0, r_max)?;
        let rows: Vec<GreenRow> = green.radii.iter().zip(&green.f).map(|(&r, &f)| GreenRow { r, f }).collect();
        csv_out(ctx, out, "green.csv", &rows)?;

        out.metric("morrey", json!(morrey));
        out.metric("campanato", json!(campanato));
        out.metric("holder", json!(holder));
        out.metric("phi_growth", json!(phi));
        out.metric("green", json!({"gamma": green.gamma, "alpha": green.alpha, "epsilon": green.epsilon, "certified": green.certified}));
        out.check(Assertion::flag("phi_monotone", phi.monotone));
        out.check(Assertion::at_most("holder_over_campanato", holder.ratio, HOLDER_CONSTANT));
        out.check(Assertion::flag("green_certified", green.certified));
        Ok(())
    }
}

pub struct Decay;

#[derive(Serialize)]
struct SliceRow {
    ell: f64,
    sup_s: f64,
}

impl Experiment for Decay {
    fn name(&self) -> &'static str {
        "decay"
    }
    fn randomized(&self) -> bool {
        true
    }
    fn run(&self, ctx: &mut Context, out: &mut Outcome) -> Result<()> {
        if ctx.cfg.domain.kind != "cylinder" {
            return Err(PhymError::Config("decay runs need domain.kind = \"cylinder\"".into()));
        }
        let solved = solve_common(ctx, out)?;
        let d = &solved.domain;
        let l = d.lengths[0];
        let (lo, hi) = match &ctx.cfg.analysis.window {
            Some(w) => (w[0], w[1]),
            None => (5.0 * l / 12.0, 5.0 * l / 6.0),
        };
        let all = decay_fit_window(d, &solved.state.s, 0.0, l)?;
        let rows: Vec<SliceRow> = all.samples.iter().map(|&(ell, sup_s)| SliceRow { ell, sup_s }).collect();
        csv_out(ctx, out, "decay.csv", &rows)?;
        let fit = decay_fit_window(d, &solved.state.s, lo, hi)?;
        out.metric("decay", json!({"rate": fit.rate, "prefactor": fit.prefactor, "window": [lo, hi], "decaying": fit.decaying}));
        out.check(Assertion::flag("decaying", fit.decaying && fit.rate > 0.0));
        Ok(())
    }
}

pub struct Poincare;

#[derive(Serialize)]
struct SweepRow {
    epsilon: f64,
    q1: f64,
    q2: f64,
    lambda_c: f64,
    lambda_d: f64,
    bound: f64,
}

impl Experiment for Poincare {
    fn name(&self) -> &'static str {
        "poincare"
    }
    fn randomized(&self) -> bool {
        false
    }
    fn run(&self, ctx: &mut Context, out: &mut Outcome) -> Result<()> {
        let p = ctx.cfg.poincare.clone();
        let sweep = blowup_sweep(p.n, &p.epsilons, (p.annulus[0], p.annulus[1]), p.points, p.sigma)?;
        let rows: Vec<SweepRow> = sweep
            .reports
            .iter()
            .map(|(e, r)| SweepRow { epsilon: *e, q1: r.q1, q2: r.q2, lambda_c: r.lambda_c, lambda_d: r.lambda_d, bound: r.bound })
            .collect();
        csv_out(ctx, out, "poincare.csv", &rows)?;
        out.metric("spread", json!(sweep.spread));
        out.metric("sup_bound", json!(rows.iter().map(|r| r.bound).fold(0.0, f64::max)));
        out.check(Assertion::flag("bounds_finite", rows.iter().all(|r| r.bound.is_finite())));
        out.check(Assertion::at_most("uniform_in_epsilon", sweep.spread, p.max_spread));
        Ok(())
    }
}
