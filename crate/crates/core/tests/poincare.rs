use nalgebra::{DMatrix, SymmetricEigen};
use phym::geometry::{CylinderParams, GridDomain};
use phym::poincare::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::f64::consts::PI;

#[test]
fn single_ball_domain_has_one_triple() {
    let d = GridDomain::boxed(&[0.2, 0.2], &[5, 5]).unwrap();
    let cov = build_covering(&WeightedLattice::flat(&d), 0.5).unwrap();
    assert_eq!(cov.triples.len(), 1);
    assert_eq!(cov.q1, 1);
    assert!(cov.witnesses.is_empty());
}

#[test]
fn sigma_below_resolution_is_rejected() {
    let d = GridDomain::unit_torus(1, 16);
    assert!(matches!(build_covering(&WeightedLattice::flat(&d), 0.1), Err(phym::PhymError::Resolution(_))));
}

#[test]
fn q1_matches_pairwise_intersections() {
    let d = GridDomain::unit_torus(1, 16);
    let cov = build_covering(&WeightedLattice::flat(&d), 0.125).unwrap();
    let sets: Vec<HashSet<usize>> = cov.triples.iter().map(|t| t.a_sharp.iter().copied().collect()).collect();
    let brute = (0..sets.len())
        .map(|i| (0..sets.len()).filter(|&j| !sets[i].is_disjoint(&sets[j])).count())
        .max()
        .unwrap();
    assert_eq!(cov.q1, brute);
    // centres are σ-separated and every site is within σ of one
    let pos: Vec<Vec<f64>> = (0..d.len()).map(|i| d.position(i)).collect();
    let centers: Vec<usize> = cov.triples.iter().map(|t| t.center.unwrap()).collect();
    for (a, &i) in centers.iter().enumerate() {
        for &j in &centers[a + 1..] {
            assert!(d.distance(&pos[i], &pos[j]) >= 0.125 - 1e-12);
        }
    }
    for p in &pos {
        assert!(centers.iter().any(|&c| d.distance(p, &pos[c]) < 0.125));
    }
}

#[test]
fn witnesses_contain_touching_pairs() {
    let d = GridDomain::boxed(&[1.0, 0.75], &[17, 13]).unwrap();
    let lat = WeightedLattice::flat(&d);
    let cov = build_covering(&lat, 0.125).unwrap();
    assert!(!cov.witnesses.is_empty());
    for &(i, j, k) in &cov.witnesses {
        let star: HashSet<usize> = cov.triples[k].a_star.iter().copied().collect();
        assert!(cov.triples[i].a.iter().chain(&cov.triples[j].a).all(|s| star.contains(s)));
        let ratio = lat.volume(&cov.triples[k].a_star) / cov.volumes[i].min(cov.volumes[j]);
        assert!(ratio <= cov.q2 + 1e-12);
    }
}

#[test]
fn cylinder_covering_has_the_end_collar() {
    let p = CylinderParams { length: 3.0, delta_v: 1.0, delta_e: 1.0, delta_h: 1.0 };
    let d = GridDomain::cylinder(1, p, &[1.0], &[49, 16]).unwrap();
    let cov = build_covering(&WeightedLattice::flat(&d), 0.125).unwrap();
    let collar = &cov.triples[0];
    assert!(collar.center.is_none());
    assert!(collar.a.iter().all(|&i| d.position(i)[0] > 2.5));
    assert_eq!(collar.a_star, collar.a_sharp);
    assert!(cov.triples[1..].iter().all(|t| d.position(t.center.unwrap())[0] <= 2.5));
}

#[test]
fn two_vertex_graph() {
    let m = 0.7;
    let g = WeightedGraph::new(vec![m, m], vec![(0, 1, m)]).unwrap();
    let f = [1.0, -1.0];
    assert!((g.variance(&f) - 2.0 * m).abs() < 1e-15);
    // ½ Σ over ordered pairs counts the edge from both ends
    assert!((g.energy(&f) - 4.0 * m).abs() < 1e-15);
    assert!((discrete_poincare(&g) - 0.5).abs() < 1e-14);
    assert_eq!(g.variance(&[2.0, 2.0]), 0.0);
}

/// `1/λ_min` of the energy form on an `m`-orthonormal basis of the
/// complement of constants, built by Gram–Schmidt.
fn brute_force_lambda_d(g: &WeightedGraph) -> f64 {
    let n = g.masses.len();
    let ip = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&g.masses).map(|((x, y), m)| x * y * m).sum::<f64>();
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for e in 0..n {
        let mut v: Vec<f64> = (0..n).map(|k| if k == e { 1.0 } else { 0.0 }).collect();
        for b in &basis {
            let c = ip(&v, b) / ip(b, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        if ip(&v, &v) > 1e-10 {
            basis.push(v);
        }
    }
    let q: Vec<Vec<f64>> = basis[1..].iter().map(|b| b.iter().map(|x| x / ip(b, b).sqrt()).collect()).collect();
    let k = q.len();
    let form = |a: &[f64], b: &[f64]| g.edges.iter().map(|&(i, j, w)| w * (a[i] - a[j]) * (b[i] - b[j])).sum::<f64>();
    let reduced = DMatrix::from_fn(k, k, |a, b| form(&q[a], &q[b]));
    let lmin = SymmetricEigen::new(reduced).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    1.0 / lmin
}

fn random_graph(rng: &mut ChaCha8Rng) -> WeightedGraph {
    let n = rng.gen_range(3..=8);
    let masses: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
    // a path keeps it connected, extra edges at random
    let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|i| (i - 1, i, masses[i - 1].max(masses[i]))).collect();
    for i in 0..n {
        for j in i + 2..n {
            if rng.gen_bool(0.3) {
                edges.push((i, j, masses[i].max(masses[j])));
            }
        }
    }
    WeightedGraph::new(masses, edges).unwrap()
}

#[test]
fn discrete_constant_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let g = random_graph(&mut rng);
        let ld = discrete_poincare(&g);
        let oracle = brute_force_lambda_d(&g);
        assert!((ld - oracle).abs() <= 1e-10 * oracle, "{ld} vs {oracle}");
        for _ in 0..50 {
            let f: Vec<f64> = (0..g.masses.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(g.variance(&f) <= ld * g.energy(&f) * (1.0 + 1e-12));
        }
        let c = rng.gen_range(0.1..10.0);
        let scaled = WeightedGraph::new(
            g.masses.iter().map(|m| c * m).collect(),
            g.edges.iter().map(|&(i, j, w)| (i, j, c * w)).collect(),
        )
        .unwrap();
        assert!((discrete_poincare(&scaled) - ld).abs() <= 1e-10 * ld);
    }
}

#[test]
fn disconnected_graph_is_infinite() {
    let g = WeightedGraph::new(vec![1.0; 4], vec![(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
    assert!(discrete_poincare(&g).is_infinite());
}

#[test]
fn interval_constant_scales_like_length_squared() {
    for len in [0.5, 1.0, 2.0] {
        let consts: Vec<f64> = [33, 65]
            .iter()
            .map(|&m| {
                let d = GridDomain::boxed(&[len], &[m]).unwrap();
                let all: Vec<usize> = (0..d.len()).collect();
                neumann_constant(&WeightedLattice::flat(&d), &all) / (len * len)
            })
            .collect();
        println!("ℓ = {len}: Λ/ℓ² = {consts:?}");
        assert!((consts[1] * PI * PI - 1.0).abs() < 2e-3);
        assert!((consts[0] / consts[1] - 1.0).abs() < 5e-3);
    }
}

#[test]
fn flat_and_blown_up_annulus_constants_are_comparable() {
    let all = |p: &BlowupProfile| -> f64 {
        let lat = p.lattice().unwrap();
        let sites: Vec<usize> = (0..lat.domain.len()).collect();
        neumann_constant(&lat, &sites)
    };
    let flat = all(&BlowupProfile::new(3, 0.0, 0.5, 2.0, 61).unwrap());
    let blown = all(&BlowupProfile::new(3, 1.0, 0.5, 2.0, 61).unwrap());
    println!("annulus constants: flat {flat:.4}, ε = 1 {blown:.4}");
    assert!(flat.is_finite() && blown.is_finite());
    assert!((flat / blown).max(blown / flat) <= 4.0);
}

#[test]
fn volume_ratio_examples() {
    assert_eq!(volume_ratio(3, 0.3, 0.3), 2.0);
    assert!((volume_ratio(3, 1e-4, 1.0) - 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn combined_bound_is_monotone(q1 in 1.0f64..20.0, q2 in 1.0f64..20.0, lc in 0.01f64..5.0, ld in 0.01f64..5.0, bump in 0.0f64..2.0) {
        let base = combined_bound(q1, q2, lc, ld).unwrap();
        prop_assert!(combined_bound(q1 + bump, q2, lc, ld).unwrap() >= base);
        prop_assert!(combined_bound(q1, q2 + bump, lc, ld).unwrap() >= base);
        prop_assert!(combined_bound(q1, q2, lc + bump, ld).unwrap() >= base);
        prop_assert!(combined_bound(q1, q2, lc, ld + bump).unwrap() >= base);
    }
}

fn flat_instances() -> Vec<(GridDomain, f64)> {
    vec![
        (GridDomain::boxed(&[1.0, 1.0], &[17, 17]).unwrap(), 0.125),
        (GridDomain::boxed(&[1.0, 1.0], &[17, 17]).unwrap(), 0.25),
        (GridDomain::boxed(&[1.0, 0.5], &[17, 9]).unwrap(), 0.125),
        (GridDomain::boxed(&[2.0, 1.0], &[17, 9]).unwrap(), 0.25),
        (GridDomain::boxed(&[1.0], &[65]).unwrap(), 0.0625),
        (GridDomain::boxed(&[3.0], &[61]).unwrap(), 0.1),
        (GridDomain::unit_torus(1, 16), 0.125),
        (GridDomain::unit_torus(1, 16), 0.25),
        (GridDomain::torus(1, &[2.0, 1.0], &[24, 12]).unwrap(), 0.2),
        (GridDomain::torus(1, &[1.0, 1.0], &[20, 20]).unwrap(), 0.15),
    ]
}

#[test]
fn combined_bound_dominates_global_constant() {
    for (d, sigma) in flat_instances() {
        let lat = WeightedLattice::flat(&d);
        let rep = poincare_bound(&lat, sigma).unwrap();
        let all: Vec<usize> = (0..d.len()).collect();
        let global = neumann_constant(&lat, &all);
        println!("{:?} {:?} σ={sigma}: global {global:.4e} bound {:.4e} (Q1 {} Q2 {:.2} Λc {:.3e} Λd {:.3e})", d.kind, d.points, rep.bound, rep.q1, rep.q2, rep.lambda_c, rep.lambda_d);
        assert!(rep.bound >= global);
    }
}

#[test]
fn blowup_sweep_is_uniform_in_epsilon() {
    let eps: Vec<f64> = (0..7).map(|k| 0.5f64.powi(k)).collect();
    let sweep = blowup_sweep(3, &eps, (0.5, 2.0), 61, 0.1).unwrap();
    for (e, r) in &sweep.reports {
        println!("ε = {e}: bound {:.4e} (Q1 {} Q2 {:.3} Λc {:.4} Λd {:.4})", r.bound, r.q1, r.q2, r.lambda_c, r.lambda_d);
    }
    println!("spread {:.4}", sweep.spread);
    assert!(sweep.spread <= 3.0);
}
