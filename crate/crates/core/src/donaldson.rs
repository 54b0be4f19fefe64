//! The Donaldson functional
//! `𝓜(H₀, H₀e^s) = ∫₀¹ ∫_X ⟨s, 𝔎(us)⟩ du`
//! evaluated with Gauss–Legendre quadrature in `u`.

use crate::error::{PhymError, Result};
use crate::fields::{DirectRoute, GaugedCurvature, Reference};
use crate::geometry::GridDomain;
use crate::matcalc::CMat;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

pub const DEFAULT_NODES: usize = 12;

/// Gauss–Legendre nodes and weights on `[0, 1]` (Golub–Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (0.5 * (eig.eigenvalues[i] + 1.0), eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionalEval {
    pub value: f64,
    pub quad_nodes: usize,
    /// `(u, ∫⟨s, 𝔎(us)⟩)` at the quadrature nodes.
    pub path: Vec<(f64, f64)>,
}

/// `m'(u) = ∫_X ⟨s, 𝔎(us)⟩`.
pub fn integrand(reference: &Reference, s: &[CMat], u: f64) -> Result<f64> {
    let us: Vec<CMat> = s.iter().map(|m| *m * u).collect();
    let k = DirectRoute.eval(reference, &us)?;
    let dots: Vec<f64> = s.iter().zip(&k).map(|(a, b)| a.dot(b)).collect();
    Ok(reference.domain().integrate(&dots))
}

pub fn donaldson_m(reference: &Reference, s: &[CMat], quad: usize) -> Result<FunctionalEval> {
    if quad < 4 {
        return Err(PhymError::Precondition(format!("need at least 4 quadrature nodes, got {quad}")));
    }
    let (nodes, weights) = gauss_legendre(quad);
    let mut path = Vec::with_capacity(quad);
    let mut value = 0.0;
    for (u, w) in nodes.iter().zip(&weights) {
        let f = integrand(reference, s, *u)?;
        value += w * f;
        path.push((*u, f));
    }
    Ok(FunctionalEval { value, quad_nodes: quad, path })
}

/// `𝓜(H_a, H_b)` for two holomorphic-frame metrics on the same bundle.
pub fn donaldson_between(domain: &GridDomain, p_a: &[CMat], p_b: &[CMat], quad: usize) -> Result<f64> {
    let reference = Reference::new(domain, p_a.to_vec())?;
    let s: Vec<CMat> = reference.state_of(p_b).into_iter().map(|m| m.herm_part()).collect();
    Ok(donaldson_m(&reference, &s, quad)?.value)
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperBound {
    pub m: f64,
    /// `∫|s||K_{H₀e^s}|`
    pub bound: f64,
    pub ratio: f64,
}

pub fn upper_bound_check(reference: &Reference, s: &[CMat], quad: usize) -> Result<UpperBound> {
    let m = donaldson_m(reference, s, quad)?.value;
    let k = DirectRoute.eval(reference, s)?;
    let prod: Vec<f64> = s.iter().zip(&k).map(|(a, b)| a.norm() * b.norm()).collect();
    let bound = reference.domain().integrate(&prod);
    let ratio = if bound > 0.0 { m / bound } else { 0.0 };
    Ok(UpperBound { m, bound, ratio })
}

#[derive(Clone, Debug, Serialize)]
pub struct CoercivityReport {
    /// `‖σs‖_{L²}` for each probe scale.
    pub norms: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `𝓜` against `‖σs‖_{L²}`.
    pub slope: f64,
}

/// Samples `𝓜(H₀, H₀e^{σs})` along the given scales.
pub fn coercivity_probe(reference: &Reference, s: &[CMat], sigmas: &[f64], quad: usize) -> Result<CoercivityReport> {
    let d = reference.domain();
    let base = d.integrate(&s.iter().map(|m| m.norm_sqr()).collect::<Vec<_>>()).sqrt();
    let mut norms = Vec::with_capacity(sigmas.len());
    let mut values = Vec::with_capacity(sigmas.len());
    for &sig in sigmas {
        let scaled: Vec<CMat> = s.iter().map(|m| *m * sig).collect();
        norms.push(sig.abs() * base);
        values.push(donaldson_m(reference, &scaled, quad)?.value);
    }
    let n = norms.len() as f64;
    let mx = norms.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxy: f64 = norms.iter().zip(&values).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = norms.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(CoercivityReport { norms, values, slope })
}
