use phym::analysis::*;
use phym::geometry::{CylinderParams, GridDomain};
use phym::matcalc::CMat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Direct double loop over centres, radii and all sites.
fn brute_force(f: &SampledFunction, p: f64, lambda: f64, recentre: bool) -> f64 {
    let d = &f.domain;
    let mut best: f64 = 0.0;
    for r in default_radii(d) {
        for x in 0..d.len() {
            let px = d.position(x);
            let inside: Vec<usize> = (0..d.len()).filter(|&y| d.distance(&px, &d.position(y)) <= r * (1.0 + 1e-12)).collect();
            let mut mean = vec![0.0; f.k];
            if recentre {
                let w: f64 = inside.iter().map(|&y| d.weight(y)).sum();
                for &y in &inside {
                    for c in 0..f.k {
                        mean[c] += d.weight(y) * f.at(y)[c] / w;
                    }
                }
            }
            let mut mass = 0.0;
            for &y in &inside {
                let dev: f64 = (0..f.k).map(|c| (f.at(y)[c] - mean[c]).powi(2)).sum();
                mass += d.weight(y) * dev.sqrt().powf(p);
            }
            best = best.max((r.powf(-lambda) * mass).powf(1.0 / p));
        }
    }
    best
}

fn trig(d: &GridDomain, seed: u64) -> SampledFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-2..=2) as f64, rng.gen_range(-2..=2) as f64, rng.gen_range(0.0..6.0)))
        .collect();
    SampledFunction::from_fn(d, |x| {
        terms.iter().map(|(a, k, l, ph)| a * (2.0 * PI * (k * x[0] + l * x[1]) + ph).cos()).sum()
    })
    .unwrap()
}

#[test]
fn norms_match_brute_force() {
    let unit_box = GridDomain::boxed(&[1.0, 1.0], &[24, 24]).unwrap();
    let x1 = SampledFunction::from_fn(&unit_box, |x| x[0]).unwrap();
    let torus = GridDomain::unit_torus(1, 20);
    let cases = [(x1, 2.0, 1.5), (trig(&torus, 3), 2.0, 2.0), (trig(&torus, 4), 1.0, 0.5)];
    for (f, p, lambda) in &cases {
        let m = morrey_norm(f, *p, *lambda).unwrap();
        let c = campanato_seminorm(f, *p, *lambda).unwrap();
        let (bm, bc) = (brute_force(f, *p, *lambda, false), brute_force(f, *p, *lambda, true));
        assert!((m - bm).abs() <= 1e-12 * bm.max(1.0), "{m} vs {bm}");
        assert!((c - bc).abs() <= 1e-12 * bc.max(1.0), "{c} vs {bc}");
    }
}

#[test]
fn zero_and_constant_functions() {
    let d = GridDomain::unit_torus(1, 12);
    let zero = SampledFunction::from_fn(&d, |_| 0.0).unwrap();
    assert_eq!(morrey_norm(&zero, 2.0, 1.0).unwrap(), 0.0);
    assert_eq!(campanato_seminorm(&zero, 2.0, 1.0).unwrap(), 0.0);
    let one = SampledFunction::from_fn(&d, |_| 3.5).unwrap();
    assert_eq!(campanato_seminorm(&one, 2.0, 3.0).unwrap(), 0.0);
    let h = holder_from_campanato(&one, 0.5).unwrap();
    assert_eq!((h.holder, h.campanato), (0.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn morrey_is_homogeneous_and_campanato_ignores_constants(seed in 0u64..1000, c in -3.0f64..3.0, shift in -5.0f64..5.0) {
        let d = GridDomain::unit_torus(1, 10);
        let f = trig(&d, seed);
        let scaled = SampledFunction::new(&d, 1, f.values.iter().map(|v| c * v).collect()).unwrap();
        let shifted = SampledFunction::new(&d, 1, f.values.iter().map(|v| v + shift).collect()).unwrap();
        let m = morrey_norm(&f, 2.0, 1.0).unwrap();
        prop_assert!((morrey_norm(&scaled, 2.0, 1.0).unwrap() - c.abs() * m).abs() <= 1e-12 * m.max(1.0));
        let a = campanato_seminorm(&f, 2.0, 3.0).unwrap();
        prop_assert!((campanato_seminorm(&shifted, 2.0, 3.0).unwrap() - a).abs() <= 1e-10 * a.max(1.0));
    }
}

/// `‖f‖_{L^{2,λ}} / (‖f‖_{L²} + [f]_{𝓛^{2,λ}})` and
/// `[f]_{𝓛^{2,λ+2}} / ‖∇f‖_{L^{2,λ}}` on one grid.
fn corpus_ratios(m: usize, seed: u64) -> (f64, f64) {
    let d = GridDomain::unit_torus(1, m);
    let f = trig(&d, seed);
    let lambda = 1.0;
    // the same physical radii on every grid
    let radii = [0.125, 0.25];
    let morrey = morrey_norm_on(&f, 2.0, lambda, &radii).unwrap();
    let control = f.lp_norm(2.0) + campanato_seminorm_on(&f, 2.0, lambda, &radii).unwrap();
    let poincare =
        campanato_seminorm_on(&f, 2.0, lambda + 2.0, &radii).unwrap() / morrey_norm_on(&f.gradient(), 2.0, lambda, &radii).unwrap();
    (morrey / control, poincare)
}

#[test]
fn morrey_control_and_poincare_ratios_are_stable() {
    for seed in [1, 2, 3] {
        let (a16, p16) = corpus_ratios(16, seed);
        let (a32, p32) = corpus_ratios(32, seed);
        println!("seed {seed}: control {a16:.3} → {a32:.3}, poincaré {p16:.3} → {p32:.3}");
        assert!(a16 <= 2.0 && a32 <= 2.0);
        assert!((a32 / a16 - 1.0).abs() < 0.5 && (p32 / p16 - 1.0).abs() < 0.5);
    }
}

#[test]
fn holder_is_controlled_by_campanato() {
    let d = GridDomain::unit_torus(1, 24);
    let mut worst: f64 = 0.0;
    for seed in 0..6 {
        let rep = holder_from_campanato(&trig(&d, seed), 0.5).unwrap();
        assert!(rep.exhaustive);
        worst = worst.max(rep.ratio);
    }
    let cone = {
        let b = GridDomain::boxed(&[1.0, 1.0], &[24, 24]).unwrap();
        SampledFunction::from_fn(&b, |x| ((x[0] - 0.5).powi(2) + (x[1] - 0.4).powi(2)).sqrt().powf(0.5)).unwrap()
    };
    let rep = holder_from_campanato(&cone, 0.5).unwrap();
    println!("trig corpus ratio {worst:.3}, cone ratio {:.3}", rep.ratio);
    assert!(rep.holder.is_finite() && rep.campanato > 0.0);
    assert!(worst <= HOLDER_CORPUS_CONSTANT && rep.ratio <= HOLDER_CORPUS_CONSTANT);
}

const HOLDER_CORPUS_CONSTANT: f64 = 4.0;

fn centred_box(dim: usize, m: usize) -> (GridDomain, usize) {
    let d = GridDomain::boxed(&vec![2.4; dim], &vec![m; dim]).unwrap();
    let c = d.index(&vec![m / 2; dim]);
    (d, c)
}

#[test]
fn harmonic_function_is_its_own_replacement() {
    let (d, c) = centred_box(2, 49);
    let f = SampledFunction::from_fn(&d, |x| x[0] * x[0] - x[1] * x[1] + 0.3 * x[0] * x[1] - x[1]).unwrap();
    let rep = harmonic_replacement(&f, c, 1.0).unwrap();
    assert!(rep.residual <= 1e-10);
    assert!(rep.g.iter().all(|g| g.abs() < 1e-10));
}

#[test]
fn replacement_of_square_norm() {
    let (d, c) = centred_box(2, 49);
    let f = SampledFunction::from_fn(&d, |x| (x[0] - 1.2).powi(2) + (x[1] - 1.2).powi(2)).unwrap();
    let rep = harmonic_replacement(&f, c, 1.0).unwrap();
    assert!(rep.residual <= 1e-10, "{}", rep.residual);
    // Δg = Δf = −4 in the positive-Laplacian convention, and g = 0 on the ring
    let slot: std::collections::HashMap<usize, usize> = rep.sites.iter().enumerate().map(|(j, &s)| (s, j)).collect();
    let h2 = d.h[0] * d.h[0];
    for (j, &s) in rep.sites.iter().enumerate() {
        if !rep.interior[j] {
            assert!(rep.g[j].abs() < 1e-14);
            continue;
        }
        let mut lap = 4.0 * rep.g[j];
        for a in 0..2 {
            for dir in [-1, 1] {
                lap -= rep.g[slot[&d.neighbor(s, a, dir).unwrap().0]];
            }
        }
        assert!((lap / h2 + 4.0).abs() < 1e-9, "{}", lap / h2);
    }
}

#[test]
fn replacement_rejects_balls_touching_the_boundary() {
    let (d, c) = centred_box(2, 25);
    let f = SampledFunction::from_fn(&d, |x| x[0]).unwrap();
    assert!(harmonic_replacement(&f, c, 1.3).is_err());
}

#[test]
fn harmonic_campanato_decay() {
    let fractions = [0.5, 0.25, 0.125];
    let boundary = |x: &[f64]| (2.0 * x[0]).cos() * (1.5 * x.last().unwrap()).sin() + x[0] * x.last().unwrap().powi(2);
    // n = 1: harmonic means affine, so the function itself carries the decay
    let (d1, c1) = centred_box(1, 961);
    let rep = harmonic_replacement(&SampledFunction::from_fn(&d1, boundary).unwrap(), c1, 1.0).unwrap();
    let e1 = rep.campanato_decay(&d1, &fractions, false).exponent;
    // n = 2: both h and ∇h
    let (d2, c2) = centred_box(2, 97);
    let rep = harmonic_replacement(&SampledFunction::from_fn(&d2, boundary).unwrap(), c2, 1.0).unwrap();
    assert!(rep.residual <= 1e-10, "{}", rep.residual);
    let e2 = rep.campanato_decay(&d2, &fractions, false).exponent;
    let g2 = rep.campanato_decay(&d2, &fractions, true).exponent;
    println!("exponents: n=1 {e1:.3}, n=2 {e2:.3} (gradient {g2:.3})");
    assert!(e1 >= 3.0 - 0.3);
    assert!(e2 >= 4.0 - 0.3 && g2 >= 4.0 - 0.3);
}

#[test]
fn phi_growth_of_harmonic_and_holder_gradients() {
    let d = GridDomain::boxed(&[1.0, 1.0], &[65, 65]).unwrap();
    let harmonic = phi_growth_check(&SampledFunction::from_fn(&d, |x| x[0] * x[0] - x[1] * x[1] + 0.5 * x[0] * x[1]).unwrap()).unwrap();
    println!("harmonic φ exponent {:.3}", harmonic.exponent);
    assert!(harmonic.monotone && harmonic.passes);
    assert!((harmonic.exponent - 4.0).abs() <= 0.3);
    let rough = phi_growth_check(&SampledFunction::from_fn(&d, |x| ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).powf(0.75)).unwrap()).unwrap();
    println!("|x|^1.5 φ exponent {:.3}, fit residual {:.3}", rough.exponent, rough.fit_residual);
    assert!(rough.monotone && rough.fit_residual <= 0.1);
}

#[test]
fn phi_growth_of_torus_field_is_monotone() {
    let d = GridDomain::unit_torus(1, 32);
    let s: Vec<CMat> = (0..d.len())
        .map(|i| {
            let x = d.position(i);
            let a = 0.3 * (2.0 * PI * x[0]).sin() + 0.1 * (2.0 * PI * (x[0] + x[1])).cos();
            CMat::from_diag(&[a, -a])
        })
        .collect();
    let f = SampledFunction::from_hermitian(&d, &s).unwrap();
    let prof = phi_growth_on(&f, &[1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0]).unwrap();
    assert!(prof.monotone, "{:?}", prof.phi);
}

#[test]
fn bootstrap_closed_form_matches_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let c = rng.gen_range(1.0..5.0);
        let alpha = rng.gen_range(0.5..3.0);
        let beta = rng.gen_range(0.05..alpha - 0.05);
        let eps = rng.gen_range(1e-3..1.0);
        let big_r = rng.gen_range(0.5..2.0);
        let k = rng.gen_range(0.0..3.0);
        // admissible for c ≥ 1: φ(r) = K r^α + ε r^β
        let samples: Vec<(f64, f64)> = (0..40)
            .map(|j| big_r * 0.8f64.powi(j))
            .map(|r| (r, k * r.powf(alpha) + eps * r.powf(beta)))
            .collect();
        let cert = bootstrap_exponent(&samples, c, alpha, beta, eps, big_r).unwrap();
        assert!(cert.gamma < 1.0);
        for lv in &cert.levels {
            assert!((lv.recursion - lv.closed_form).abs() <= 1e-12 * lv.closed_form.abs().max(1.0), "{lv:?}");
            assert!(lv.closed_form <= lv.coefficient * (1.0 + 1e-15));
        }
        assert!(cert.bound_holds, "margin {}", cert.margin);
    }
}

#[test]
fn bootstrap_examples() {
    let (alpha, beta) = (2.0, 1.0);
    let pure_beta: Vec<(f64, f64)> = (0..30).map(|j| 0.5f64.powi(j)).map(|r| (r, r.powf(beta))).collect();
    let cert = bootstrap_exponent(&pure_beta, 1.0, alpha, beta, 1.0, 1.0).unwrap();
    assert!(cert.bound_holds && cert.levels[0].coefficient < 10.0);
    let pure_alpha: Vec<(f64, f64)> = (0..30).map(|j| 0.5f64.powi(j)).map(|r| (r, r.powf(alpha))).collect();
    let cert = bootstrap_exponent(&pure_alpha, 1.0, alpha, beta, 0.1, 1.0).unwrap();
    assert!(cert.margin > 0.0);
}

#[test]
fn decay_lemma_on_random_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0;
    for _ in 0..100 {
        let a = rng.gen_range(0.0..2.0);
        let b = rng.gen_range(0.2..3.0);
        let delta = rng.gen_range(0.05..2.0);
        let f0 = rng.gen_range(0.0..3.0);
        let (t0, w, ph) = (rng.gen_range(0.0..1.0), rng.gen_range(0.1..3.0), rng.gen_range(0.0..6.0));
        let traj = comparison_trajectory(a, b, delta, f0, |l: f64| t0 * (1.0 + (w * l + ph).sin()), 20.0, 1e-3);
        for &(l, f, fp) in &traj {
            assert!(f >= 0.0 && f <= a * (-delta * l).exp() - b * fp + 1e-12);
        }
        let bound = decay_ode_bound(a, b, delta, f0).unwrap();
        assert!(bound.verify_comparison(20.0, 1e-3));
        violations += bound.violations(&traj.iter().map(|t| (t.0, t.1)).collect::<Vec<_>>());
    }
    assert_eq!(violations, 0);
}

#[test]
fn decay_lemma_without_source() {
    let bound = decay_ode_bound(0.0, 1.0, 1.0, 2.0).unwrap();
    assert_eq!(bound.eps, 0.5);
    assert!((bound.bound(4.0) - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
    let traj = comparison_trajectory(0.0, 1.0, 1.0, 2.0, |_| 0.0, 20.0, 1e-3);
    assert_eq!(bound.violations(&traj.iter().map(|t| (t.0, t.1)).collect::<Vec<_>>()), 0);
}

fn diag_field(d: &GridDomain, f: impl Fn(&[f64]) -> f64) -> Vec<CMat> {
    (0..d.len()).map(|i| {
        let a = f(&d.position(i));
        CMat::from_diag(&[a, -a])
    }).collect()
}

#[test]
fn green_iteration_on_constant_and_linear_fields() {
    let d = GridDomain::boxed(&[2.0, 2.0], &[129, 129]).unwrap();
    let c = d.index(&[64, 64]);
    let flat = green_dyadic_iteration(&d, &diag_field(&d, |_| 0.4), c, 0.5).unwrap();
    assert!(flat.certified && flat.f.iter().all(|v| *v == 0.0));
    let linear = green_dyadic_iteration(&d, &diag_field(&d, |x| 0.3 * x[0] - 0.2 * x[1]), c, 0.5).unwrap();
    println!("linear: gamma {:.4} alpha {:.4}", linear.gamma, linear.alpha);
    assert!(linear.certified && linear.alpha >= 0.95);
    assert!(linear.radii.iter().zip(&linear.f).all(|(r, v)| *v <= linear.epsilon * r.powf(2.0 * linear.alpha) * (1.0 + 1e-12)));
}

#[test]
fn green_iteration_on_smooth_torus_field() {
    let d = GridDomain::unit_torus(1, 64);
    let s = diag_field(&d, |x| 0.5 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos());
    let cert = green_dyadic_iteration(&d, &s, d.index(&[10, 20]), 0.25).unwrap();
    println!("torus: gamma {:.4} alpha {:.4} eps {:.4e}", cert.gamma, cert.alpha, cert.epsilon);
    assert!(cert.certified && cert.gamma < 1.0);
    assert!(cert.sigma_sup.windows(2).all(|w| w[0] <= w[1] + 1e-12));
}

fn cylinder(length: f64, m: usize) -> GridDomain {
    let p = CylinderParams { length, delta_v: 1.0, delta_e: 1.0, delta_h: 1.0 };
    GridDomain::cylinder(1, p, &[1.0], &[(length as usize) * m + 1, 8]).unwrap()
}

fn profile_field(d: &GridDomain, g: impl Fn(f64) -> f64) -> Vec<CMat> {
    diag_field(d, |x| g(x[0]) * (1.0 + 0.2 * (2.0 * PI * x[1]).cos()))
}

#[test]
fn decay_fit_on_synthetic_profiles() {
    let d = cylinder(9.0, 10);
    let single = decay_fit(&d, &profile_field(&d, |l| (-l).exp())).unwrap();
    assert!((single.rate - 1.0).abs() <= 0.02 && single.decaying);
    let sum = decay_fit(&d, &profile_field(&d, |l| (-l).exp() + (-2.0 * l).exp())).unwrap();
    println!("single {:.4}, sum {:.4}", single.rate, sum.rate);
    assert!((0.95..=1.05).contains(&sum.rate));
    let constant = decay_fit(&d, &profile_field(&d, |_| 0.7)).unwrap();
    assert!(constant.rate.abs() < 1e-10 && !constant.decaying);
    let fine = cylinder(9.0, 20);
    let refined = decay_fit(&fine, &profile_field(&fine, |l| (-l).exp() + (-2.0 * l).exp())).unwrap();
    assert!(rate_nondecreasing(&sum, &refined, 1e-3));
    assert!(decay_fit(&GridDomain::unit_torus(1, 8), &vec![CMat::zeros(2); 64]).is_err());
}

/// Regression baseline of the solved twisted cylinder below.
const CYLINDER_RATE_BASELINE: f64 = 1.57;

#[test]
fn solved_cylinder_decays() {
    use phym::fields::{heisenberg_pair, TwistBasis};
    use phym::matcalc::exp_herm;
    use phym::solver::{continuation_solve, final_curvature_sup, lubke_teleman_seed, ContinuationConfig, Problem};
    let (u, v) = heisenberg_pair(2);
    let p = CylinderParams { length: 6.0, delta_v: 1.0, delta_e: 1.0, delta_h: 1.0 };
    let d = GridDomain::cylinder(2, p, &[1.0, 2.0, 2.0], &[49, 4, 8, 8])
        .unwrap()
        .with_twist(vec![None, None, Some(u), Some(v)])
        .unwrap();
    let field = TwistBasis::new(&d, 2).unwrap().random_field(&d, &mut ChaCha8Rng::seed_from_u64(71), 0, 0.1);
    // perturbation supported in ℓ ∈ [1/4, 9/4]
    let p_minus1: Vec<CMat> = (0..d.len())
        .map(|i| {
            let l = d.position(i)[0];
            let w = if (0.25..2.25).contains(&l) { (PI * (l - 0.25) / 2.0).sin().powi(2) } else { 0.0 };
            exp_herm(&(field[i] * w))
        })
        .collect();
    let seed = lubke_teleman_seed(&d, p_minus1).unwrap();
    let prob = Problem::new(seed.reference, "direct").unwrap();
    let state = continuation_solve(&prob, &seed.s1, &ContinuationConfig::default()).unwrap();
    assert!(final_curvature_sup(&prob, &state.s).unwrap() <= 1e-8);
    let fit = decay_fit_window(&d, &state.s, 2.5, 5.0).unwrap();
    // Dirichlet cross-section eigenvalue of the twisted torus is π²/8
    let predicted = (2.0 * PI * PI / 8.0).sqrt();
    println!("cylinder rate {:.4} (baseline {CYLINDER_RATE_BASELINE}, symbol {predicted:.4})", fit.rate);
    assert!(fit.decaying && fit.rate > 0.0);
    assert!((fit.rate / CYLINDER_RATE_BASELINE - 1.0).abs() <= 0.05);
}
