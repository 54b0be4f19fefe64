//! Green-weighted Dirichlet energy on dyadic balls:
//! `f_x(r) = ∫_{B_r(x)} G_x |∇s|²` with `f(r) ≤ γ f(2r)` giving
//! `f(r) ≲ r^{2α}` for `γ = 2^{−2α}`.

use super::ball;
use crate::error::{PhymError, Result};
use crate::geometry::GridDomain;
use crate::matcalc::{exp_herm, log_posdef, CMat};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct GreenCertificate {
    pub radii: Vec<f64>,
    pub f: Vec<f64>,
    /// Largest `f(r)/f(2r)` over consecutive radii.
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub certified: bool,
    /// `sup_{B_r} |log(e^{−s̄/2} e^s e^{−s̄/2})|` with `s̄` the ball mean.
    pub sigma_sup: Vec<f64>,
    /// `‖s‖_∞` on the largest ball.
    pub s_sup: f64,
}

fn grad_sqr(d: &GridDomain, s: &[CMat], i: usize) -> f64 {
    (0..d.dim)
        .map(|a| {
            let hi = d.fetch(s, i, a, 1);
            let lo = d.fetch(s, i, a, -1);
            let g = match (lo, hi) {
                (Some(l), Some(u)) => (u - l) * (0.5 / d.h[a]),
                (None, Some(u)) => (u - s[i]) * (1.0 / d.h[a]),
                (Some(l), None) => (s[i] - l) * (1.0 / d.h[a]),
                (None, None) => CMat::zeros(s[i].rank()),
            };
            g.norm_sqr()
        })
        .sum()
}

/// Dyadic radii `r_max 2^{−j}` down to four cells; the Green kernel is the
/// domain's `|y − x|^{2−dim}`.
pub fn green_dyadic_iteration(d: &GridDomain, s: &[CMat], center: usize, r_max: f64) -> Result<GreenCertificate> {
    if s.len() != d.len() {
        return Err(PhymError::Validation("field length does not match the domain".into()));
    }
    let hmax = d.h.iter().cloned().fold(0.0, f64::max);
    let mut radii = vec![r_max];
    while radii.last().unwrap() / 2.0 >= 4.0 * hmax * (1.0 - 1e-12) {
        let next = radii.last().unwrap() / 2.0;
        radii.push(next);
    }
    if radii.len() < 3 {
        return Err(PhymError::Resolution(format!("r_max = {r_max} leaves fewer than three dyadic levels at h = {hmax}")));
    }
    radii.reverse();
    let x = d.position(center);
    let kernel = d.green_weight(&x);
    let outer = ball(d, center, r_max);
    let energy: Vec<f64> = outer.iter().map(|&i| d.weight(i) * kernel[i] * grad_sqr(d, s, i)).collect();
    let mut f = Vec::with_capacity(radii.len());
    let mut sigma_sup = Vec::with_capacity(radii.len());
    for &r in &radii {
        let sites = ball(d, center, r);
        let mut acc = 0.0;
        // both lists are sorted; accumulate the outer energies on the inner ball
        let mut j = 0;
        for &i in &sites {
            while outer[j] != i {
                j += 1;
            }
            acc += energy[j];
        }
        f.push(acc);
        let wsum: f64 = sites.iter().map(|&i| d.weight(i)).sum();
        let mut mean = CMat::zeros(s[center].rank());
        for &i in &sites {
            mean = mean + s[i] * (d.weight(i) / wsum);
        }
        let half = exp_herm(&(mean * -0.5));
        let sup = sites
            .iter()
            .map(|&i| log_posdef(&(half * exp_herm(&s[i]) * half).herm_part()).norm())
            .fold(0.0, f64::max);
        sigma_sup.push(sup);
    }
    let s_sup = outer.iter().map(|&i| s[i].norm()).fold(0.0, f64::max);
    let gamma = f.windows(2).filter(|w| w[1] > 0.0).map(|w| w[0] / w[1]).fold(0.0, f64::max);
    let (alpha, certified) = if gamma < 1.0 {
        let a = if gamma > 0.0 { (-gamma.log2() / 2.0).min(1.0) } else { 1.0 };
        (a, true)
    } else {
        (0.0, false)
    };
    let epsilon = radii.iter().zip(&f).map(|(r, v)| v / r.powf(2.0 * alpha)).fold(0.0, f64::max);
    Ok(GreenCertificate { radii, f, gamma, alpha, epsilon, certified, sigma_sup, s_sup })
}
