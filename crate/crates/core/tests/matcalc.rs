use phym::matcalc::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn herm(rng: &mut impl Rng, r: usize, norm: f64) -> CMat {
    let m = CMat::from_fn(r, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = m.herm_part();
    h.scale(norm / h.norm())
}

fn general(rng: &mut impl Rng, r: usize) -> CMat {
    CMat::from_fn(r, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `Σ_{k<terms} c_k ad_s^k x`
fn ad_series(s: &CMat, x: &CMat, coeffs: &[f64]) -> CMat {
    let mut term = *x;
    let mut acc = CMat::zeros(s.rank());
    for c in coeffs {
        acc += term.scale(*c);
        term = s.commutator(&term);
    }
    acc
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn upsilon_coeffs() -> Vec<f64> {
    (0..40).map(|k| 1.0 / factorial(k + 1)).collect()
}

fn theta_coeffs() -> Vec<f64> {
    (0..40).map(|k| if k % 2 == 0 { 0.5f64.powi(k as i32) / factorial(k + 1) } else { 0.0 }).collect()
}

/// Power series of `√φ(z)` by the square-root recursion.
fn upsilon_sqrt_coeffs() -> Vec<f64> {
    let c = upsilon_coeffs();
    let mut a = vec![0.0; 40];
    a[0] = 1.0;
    for n in 1..40 {
        let cross: f64 = (1..n).map(|i| a[i] * a[n - i]).sum();
        a[n] = (c[n] - cross) / 2.0;
    }
    a
}

fn exp_series(s: &CMat) -> CMat {
    let mut term = CMat::identity(s.rank());
    let mut acc = CMat::zeros(s.rank());
    for k in 0..40 {
        acc += term;
        term = (term * *s).scale(1.0 / (k + 1) as f64);
    }
    acc
}

fn rel(a: &CMat, b: &CMat) -> f64 {
    (*a - *b).norm() / b.norm().max(1.0)
}

#[test]
fn exp_examples() {
    let z = HermElem::new(CMat::zeros(2)).unwrap();
    assert!((mat_exp(&z).entries - CMat::identity(2)).norm() < 1e-15);
    let l2 = 2f64.ln();
    let d = HermElem::new(CMat::from_diag(&[l2, -l2])).unwrap();
    assert!((mat_exp(&d).entries - CMat::from_diag(&[2.0, 0.5])).norm() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let nrm = rng.gen_range(0.1..3.0);
        let s = herm(&mut rng, 3, nrm);
        let e = mat_exp(&HermElem::new(s).unwrap()).entries;
        assert!(rel(&e, &exp_series(&s)) <= 1e-12);
    }
}

#[test]
fn log_examples() {
    let id = PosHerm::new(CMat::identity(3)).unwrap();
    assert!(mat_log(&id).unwrap().entries.norm() < 1e-15);
    let e = std::f64::consts::E;
    let p = PosHerm::new(CMat::from_diag(&[e, 1.0 / e])).unwrap();
    assert!((mat_log(&p).unwrap().entries - CMat::from_diag(&[1.0, -1.0])).norm() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let p = exp_herm(&herm(&mut rng, 3, 2.0));
        let back = mat_exp(&mat_log(&PosHerm::new(p).unwrap()).unwrap()).entries;
        assert!(rel(&back, &p) <= 1e-12);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let m = CMat::from_rows(2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    assert!(HermElem::new(m).is_err());
    assert!(PosHerm::new(CMat::from_diag(&[1.0, -1.0])).is_err());
    assert!(HermElem::new_traceless(CMat::identity(2)).is_err());
}

#[test]
fn upsilon_on_e12() {
    let l2 = 2f64.ln();
    let s = CMat::from_diag(&[l2 / 2.0, -l2 / 2.0]);
    let e12 = CMat::unit(2, 0, 1);
    let want = e12.scale(1.0 / l2);
    assert!((upsilon_apply(&s, &e12) - want).norm() < 1e-14);
    assert!((ad_series(&s, &e12, &upsilon_coeffs()) - want).norm() < 1e-14);
    assert!((upsilon_apply(&CMat::zeros(2), &e12) - e12).norm() < 1e-15);
}

#[test]
fn diagonal_conjugation() {
    let s = CMat::from_diag(&[0.7, -0.2]);
    let e12 = CMat::unit(2, 0, 1);
    let want = e12.scale((0.45f64).exp());
    assert!((ad_exp_conj(&s, &e12) - want).norm() < 1e-14);
    let x = herm(&mut ChaCha8Rng::seed_from_u64(3), 2, 1.0);
    assert!((ad_exp_conj(&CMat::zeros(2), &x) - x).norm() < 1e-15);
}

#[test]
fn series_oracles_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for r in 2..=4 {
        for _ in 0..100 {
            let nrm = rng.gen_range(0.0..5.0);
            let s = herm(&mut rng, r, nrm);
            let x = general(&mut rng, r);
            assert!(rel(&upsilon_apply(&s, &x), &ad_series(&s, &x, &upsilon_coeffs())) <= 1e-10);
            assert!(rel(&theta_apply(&s, &x), &ad_series(&s, &x, &theta_coeffs())) <= 1e-10);
            // √φ has radius of convergence 2π; stay well inside it
            let small = s.scale(2.0 / s.norm().max(2.0));
            let want = ad_series(&small, &x, &upsilon_sqrt_coeffs());
            assert!(rel(&upsilon_sqrt_apply(&small, &x), &want) <= 1e-10);
        }
    }
}

#[test]
fn theta_least_eigenvalue_at_least_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let nrm = rng.gen_range(0.0..10.0);
        let s = herm(&mut rng, 4, nrm);
        let least = AdSpectrum::new(&s).symbol(theta_symbol).values().into_iter().fold(f64::INFINITY, f64::min);
        assert!(least >= 1.0 - 1e-12);
    }
}

#[test]
fn pairing_bound_on_ten_thousand_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..10_000 {
        let r = 2 + k % 3;
        let nrm = rng.gen_range(0.0..6.0);
        let s = herm(&mut rng, r, nrm);
        let sh = herm(&mut rng, r, 1.0);
        let lhs = ad_exp_conj(&s, &upsilon_apply(&(-s), &sh)).dot(&sh);
        assert!(lhs >= sh.norm_sqr() * (1.0 - 1e-12), "sample {k}: {lhs}");
        assert!((pairing_operator_apply(&s, &sh) - ad_exp_conj(&s, &upsilon_apply(&(-s), &sh))).norm() < 1e-10);
    }
}

#[test]
fn dexp_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let step = 1e-5;
    for _ in 0..50 {
        let x = herm(&mut rng, 3, 1.5);
        let y = herm(&mut rng, 3, 1.0);
        let fd = (exp_herm(&(x + y.scale(step))) - exp_herm(&(x - y.scale(step)))).scale(0.5 / step);
        let an = dexp(&x, &y);
        assert!((fd - an).norm() / an.norm() <= 1e-6);
    }
}

#[test]
fn upsilon_sqrt_squares_to_upsilon() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let nrm = rng.gen_range(0.0..5.0);
        let s = herm(&mut rng, 3, nrm);
        let x = general(&mut rng, 3);
        let twice = upsilon_sqrt_apply(&s, &upsilon_sqrt_apply(&s, &x));
        assert!(rel(&twice, &upsilon_apply(&s, &x)) <= 1e-12);
    }
    let x = general(&mut rng, 3);
    assert!((theta_apply(&CMat::zeros(3), &x) - x).norm() < 1e-15);
    assert!((upsilon_sqrt_apply(&CMat::zeros(3), &x) - x).norm() < 1e-15);
}

#[test]
fn spectrum_reconstructs_with_antisymmetric_gaps() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = herm(&mut rng, 4, 3.0);
    let sp = AdSpectrum::new(&s);
    assert!((sp.reconstruct() - s).norm() <= EPS_RECON * s.norm());
    let g = sp.pair_gaps();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(g[i * 4 + j], -g[j * 4 + i]);
        }
    }
}

fn herm_strategy(r: usize, max_norm: f64) -> impl Strategy<Value = CMat> {
    (prop::collection::vec(-1.0f64..1.0, 2 * r * r), 0.0..max_norm).prop_map(move |(v, nrm)| {
        let m = CMat::from_fn(r, |i, j| C64::new(v[2 * (i * r + j)], v[2 * (i * r + j) + 1])).herm_part();
        if m.norm() == 0.0 {
            m
        } else {
            m.scale(nrm / m.norm())
        }
    })
}

proptest! {
    #[test]
    fn theta_preserves_hermitian(s in herm_strategy(3, 5.0), x in herm_strategy(3, 2.0)) {
        prop_assert!(theta_apply(&s, &x).is_hermitian(1e-12));
        // e^{s/2} is not unitary: Ad(e^{s/2})x satisfies Y† = e^{−s}Ye^{s} instead
        let y = ad_exp_conj(&s, &x);
        let back = exp_herm(&(-s)) * y * exp_herm(&s);
        prop_assert!((y.adjoint() - back).norm() <= 1e-10 * (1.0 + y.norm()));
    }

    #[test]
    fn upsilon_is_selfadjoint(s in herm_strategy(3, 5.0), x in herm_strategy(3, 2.0), y in herm_strategy(3, 2.0)) {
        let a = upsilon_apply(&s, &x).inner(&y);
        let b = x.inner(&upsilon_apply(&s, &y));
        prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn pairing_dominates_norm(s in herm_strategy(4, 8.0), sh in herm_strategy(4, 3.0)) {
        let lhs = pairing_operator_apply(&s, &sh).dot(&sh);
        prop_assert!(lhs >= sh.norm_sqr() * (1.0 - 1e-12) - 1e-300);
    }

    #[test]
    fn exp_log_roundtrip(s in herm_strategy(4, 4.0)) {
        let p = PosHerm::new(exp_herm(&s)).unwrap();
        prop_assert!((mat_log(&p).unwrap().entries - s).norm() <= 1e-10 * (1.0 + s.norm()));
    }
}
