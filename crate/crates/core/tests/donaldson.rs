use phym::donaldson::*;
use phym::fields::{heisenberg_pair, Reference, TwistBasis};
use phym::geometry::GridDomain;
use phym::matcalc::{exp_herm, CMat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn heisenberg_torus(m: usize) -> GridDomain {
    let (u, v) = heisenberg_pair(2);
    GridDomain::unit_torus(1, m).with_twist(vec![Some(u), Some(v)]).unwrap()
}

fn random(d: &GridDomain, seed: u64, amp: f64) -> Vec<CMat> {
    TwistBasis::new(d, 2).unwrap().random_field(d, &mut ChaCha8Rng::seed_from_u64(seed), 1, amp)
}

fn curved_reference(d: &GridDomain, seed: u64) -> Reference {
    Reference::new(d, random(d, seed, 0.3).iter().map(exp_herm).collect()).unwrap()
}

fn additivity_gap(m: usize, seed: u64) -> (f64, f64) {
    let d = heisenberg_torus(m);
    let r0 = curved_reference(&d, seed);
    let p0 = r0.p0().to_vec();
    let p1 = r0.metric(&random(&d, seed + 1, 0.3));
    let p2 = r0.metric(&random(&d, seed + 2, 0.3));
    let m02 = donaldson_between(&d, &p0, &p2, DEFAULT_NODES).unwrap();
    let m01 = donaldson_between(&d, &p0, &p1, DEFAULT_NODES).unwrap();
    let m12 = donaldson_between(&d, &p1, &p2, DEFAULT_NODES).unwrap();
    ((m02 - m01 - m12).abs(), m02.abs().max(m01.abs()).max(m12.abs()))
}

#[test]
fn additivity_defect_vanishes_at_second_order() {
    let (e1, _) = additivity_gap(16, 10);
    let (e2, _) = additivity_gap(32, 10);
    let (e3, scale) = additivity_gap(64, 10);
    println!("additivity gaps {e1:.3e} {e2:.3e} {e3:.3e} (scale {scale:.3})");
    assert!((e2 / e3).log2() >= 1.9, "{e2} {e3}");
}

#[test]
fn path_functional_is_convex() {
    let d = heisenberg_torus(16);
    let r0 = curved_reference(&d, 20);
    let s = random(&d, 21, 0.5);
    let m: Vec<f64> = (0..=10)
        .map(|k| {
            let us: Vec<CMat> = s.iter().map(|x| *x * (k as f64 / 10.0)).collect();
            donaldson_m(&r0, &us, DEFAULT_NODES).unwrap().value
        })
        .collect();
    for w in m.windows(3) {
        assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9, "{w:?}");
    }
}

#[test]
fn quadrature_refinement_is_converged() {
    let d = heisenberg_torus(16);
    let r0 = curved_reference(&d, 30);
    let s = random(&d, 31, 0.4);
    let a = donaldson_m(&r0, &s, 8).unwrap().value;
    let b = donaldson_m(&r0, &s, 16).unwrap().value;
    assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} {b}");
}

#[test]
fn derivative_matches_integrand() {
    let d = heisenberg_torus(16);
    let r0 = curved_reference(&d, 40);
    let s = random(&d, 41, 0.4);
    let m_at = |u: f64| {
        let us: Vec<CMat> = s.iter().map(|x| *x * u).collect();
        donaldson_m(&r0, &us, 16).unwrap().value
    };
    let u = 0.6;
    let errs: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&step| {
            // 𝓜(us) = u·∫₀¹⟨s, 𝔎(vus)⟩dv, so d/du 𝓜(us) = ⟨s, 𝔎(us)⟩
            let fd = (m_at(u + step) - m_at(u - step)) / (2.0 * step);
            (fd - integrand(&r0, &s, u).unwrap()).abs()
        })
        .collect();
    assert!((errs[0] / errs[1]).log2() >= 1.8, "{errs:?}");
}

#[test]
fn flat_reference_gives_nonnegative_values() {
    let d = heisenberg_torus(16);
    let r0 = Reference::identity(&d, 2);
    for seed in 0..5 {
        let s = random(&d, 50 + seed, 0.5);
        let v = donaldson_m(&r0, &s, DEFAULT_NODES).unwrap().value;
        assert!(v >= -1e-12, "{v}");
    }
}

#[test]
fn upper_bound_ratio_is_bounded() {
    let d = heisenberg_torus(16);
    let mut ratios = Vec::new();
    for seed in 0..6 {
        let r0 = curved_reference(&d, 60 + seed);
        let s = random(&d, 70 + seed, 0.4);
        let rep = upper_bound_check(&r0, &s, DEFAULT_NODES).unwrap();
        ratios.push(rep.ratio);
    }
    println!("upper-bound ratios {ratios:?}");
    // 𝓜 ≤ C∫|s||K| with the corpus constant C = 1
    assert!(ratios.iter().all(|&r| r <= 1.0), "{ratios:?}");
}

#[test]
fn coercivity_on_stable_bundle() {
    let d = heisenberg_torus(16);
    let r0 = Reference::identity(&d, 2);
    let s = random(&d, 80, 0.2);
    let sig: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let rep = coercivity_probe(&r0, &s, &sig, DEFAULT_NODES).unwrap();
    println!("coercivity {:?} slope {}", rep.values, rep.slope);
    assert!(rep.slope > 0.0);
    assert!(rep.values.windows(2).all(|w| w[1] > w[0]));
}
