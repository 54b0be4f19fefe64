//! Quick invariant suite: every check is exact or holds to a fixed tolerance
//! independent of resolution.

use crate::experiments::{Context, Experiment};
use crate::report::{Assertion, Outcome};
use phym::analysis::{
    bootstrap_exponent, campanato_seminorm, comparison_trajectory, decay_ode_bound, morrey_norm, SampledFunction,
};
use phym::donaldson::donaldson_m;
use phym::fields::{heisenberg_pair, TwistBasis};
use phym::geometry::GridDomain;
use phym::matcalc::{exp_herm, log_posdef, pairing_operator_apply, theta_symbol, AdSpectrum, CMat, C64};
use phym::poincare::{combined_bound, discrete_poincare, neumann_constant, WeightedGraph, WeightedLattice};
use phym::solver::{lubke_teleman_seed, sup_norm, Problem};
use phym::Result;
use rand::Rng;
use serde_json::json;
use std::f64::consts::PI;

pub struct Verify;

fn random_herm(rng: &mut impl Rng, r: usize, scale: f64) -> CMat {
    CMat::from_fn(r, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).herm_part() * scale
}

fn matrix_identities(ctx: &mut Context, out: &mut Outcome) {
    let (mut theta_min, mut pairing_min, mut roundtrip) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for k in 0..2000 {
        let r = 2 + k % 3;
        let s = random_herm(&mut ctx.rng, r, 4.0);
        let x = random_herm(&mut ctx.rng, r, 1.0);
        let theta = AdSpectrum::new(&s).symbol(theta_symbol).values();
        theta_min = theta.into_iter().fold(theta_min, f64::min);
        pairing_min = pairing_min.min(pairing_operator_apply(&s, &x).dot(&x) / x.norm_sqr());
        roundtrip = roundtrip.max((log_posdef(&exp_herm(&s)) - s).norm() / (1.0 + s.norm()));
    }
    out.check(Assertion::at_least("theta_least_eigenvalue", theta_min, 1.0 - 1e-12));
    out.check(Assertion::at_least("pairing_over_norm", pairing_min, 1.0 - 1e-12));
    out.check(Assertion::at_most("exp_log_roundtrip", roundtrip, 1e-10));
}

fn seed_identity(ctx: &mut Context, out: &mut Outcome) -> Result<()> {
    let (u, v) = heisenberg_pair(2);
    let plain = GridDomain::unit_torus(1, 16);
    let twisted = plain.clone().with_twist(vec![Some(u), Some(v)])?;
    let (mut worst, mut m_zero) = (0.0f64, 0.0f64);
    for d in [plain, twisted] {
        let field = TwistBasis::new(&d, 2)?.random_field(&d, &mut ctx.rng, 1, 0.02);
        let seed = lubke_teleman_seed(&d, field.iter().map(exp_herm).collect())?;
        let p = Problem::new(seed.reference, "direct")?;
        worst = worst.max(sup_norm(&p.l_map(&seed.s1, 1.0)?));
        // 𝓜 vanishes at s = 0
        let zero = vec![CMat::zeros(2); d.len()];
        m_zero = m_zero.max(donaldson_m(p.reference(), &zero, 8)?.value.abs());
    }
    out.check(Assertion::at_most("donaldson_at_zero", m_zero, 0.0));
    out.check(Assertion::at_most("seed_identity", worst, 1e-10));
    Ok(())
}

fn lemmas(ctx: &mut Context, out: &mut Outcome) -> Result<()> {
    let mut worst = 0.0f64;
    let mut holds = true;
    for _ in 0..100 {
        let rng = &mut ctx.rng;
        let c = rng.gen_range(1.0..5.0);
        let alpha = rng.gen_range(0.5..3.0);
        let beta = rng.gen_range(0.05..alpha - 0.05);
        let eps = rng.gen_range(1e-3..1.0);
        let big_r = rng.gen_range(0.5..2.0);
        let k = rng.gen_range(0.0..3.0);
        let samples: Vec<(f64, f64)> =
            (0..40).map(|j| big_r * 0.8f64.powi(j)).map(|r| (r, k * r.powf(alpha) + eps * r.powf(beta))).collect();
        let cert = bootstrap_exponent(&samples, c, alpha, beta, eps, big_r)?;
        holds &= cert.bound_holds;
        for lv in &cert.levels {
            worst = worst.max((lv.recursion - lv.closed_form).abs() / lv.closed_form.abs().max(1.0));
        }
    }
    out.check(Assertion::at_most("bootstrap_closed_form", worst, 1e-12));
    out.check(Assertion::flag("bootstrap_bound", holds));

    let mut violations = 0;
    for _ in 0..100 {
        let rng = &mut ctx.rng;
        let a = rng.gen_range(0.0..2.0);
        let b = rng.gen_range(0.2..3.0);
        let delta = rng.gen_range(0.05..2.0);
        let f0 = rng.gen_range(0.0..3.0);
        let (t0, w, ph) = (rng.gen_range(0.0..1.0), rng.gen_range(0.1..3.0), rng.gen_range(0.0..6.0));
        let traj = comparison_trajectory(a, b, delta, f0, |l: f64| t0 * (1.0 + (w * l + ph).sin()), 20.0, 1e-2);
        let bound = decay_ode_bound(a, b, delta, f0)?;
        violations += bound.violations(&traj.iter().map(|t| (t.0, t.1)).collect::<Vec<_>>());
    }
    out.metric("decay_lemma_violations", json!(violations));
    out.check(Assertion::at_most("decay_lemma_violations", violations as f64, 0.0));
    Ok(())
}

fn norms(ctx: &mut Context, out: &mut Outcome) -> Result<()> {
    let d = GridDomain::boxed(&[1.0, 1.0], &[17, 17])?;
    let constant = SampledFunction::from_fn(&d, |_| 0.7)?;
    out.check(Assertion::at_most("campanato_of_constant", campanato_seminorm(&constant, 2.0, 3.0)?, 0.0));
    let (a, b) = (ctx.rng.gen_range(0.5..2.0), ctx.rng.gen_range(0.0..PI));
    let f = SampledFunction::from_fn(&d, |x| (a * x[0] + b).sin() * x[1])?;
    let g = SampledFunction::from_fn(&d, |x| 3.0 * (a * x[0] + b).sin() * x[1])?;
    let m = morrey_norm(&f, 2.0, 1.0)?;
    let gap = (morrey_norm(&g, 2.0, 1.0)? - 3.0 * m).abs() / m;
    out.check(Assertion::at_most("morrey_homogeneity", gap, 1e-12));
    Ok(())
}

fn poincare(out: &mut Outcome) -> Result<()> {
    let two = WeightedGraph::new(vec![1.0, 1.0], vec![(0, 1, 1.0)])?;
    out.check(Assertion::at_most("two_vertex_lambda_d", (discrete_poincare(&two) - 0.5).abs(), 1e-12));
    let split = WeightedGraph::new(vec![1.0, 1.0, 1.0], vec![(0, 1, 1.0)])?;
    out.check(Assertion::flag("disconnected_is_infinite", discrete_poincare(&split).is_infinite()));
    let interval = GridDomain::boxed(&[1.0], &[129])?;
    let lat = WeightedLattice::flat(&interval);
    let all: Vec<usize> = (0..interval.len()).collect();
    let rel = (neumann_constant(&lat, &all) * PI * PI - 1.0).abs();
    out.check(Assertion::at_most("interval_neumann_constant", rel, 1e-3));
    let lo = combined_bound(2.0, 1.5, 0.1, 0.5)?;
    let hi = combined_bound(3.0, 1.5, 0.1, 0.5)?;
    out.check(Assertion::flag("combined_bound_monotone", hi > lo));
    Ok(())
}

impl Experiment for Verify {
    fn name(&self) -> &'static str {
        "verify"
    }
    fn randomized(&self) -> bool {
        true
    }
    fn run(&self, ctx: &mut Context, out: &mut Outcome) -> Result<()> {
        matrix_identities(ctx, out);
        seed_identity(ctx, out)?;
        lemmas(ctx, out)?;
        norms(ctx, out)?;
        poincare(out)?;
        out.metric("checks", json!(out.assertions.len()));
        Ok(())
    }
}
