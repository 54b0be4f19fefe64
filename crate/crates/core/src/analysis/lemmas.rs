//! The bootstrap-exponent lemma and the abstract decay lemma.

use crate::error::{PhymError, Result};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapLevel {
    pub k: usize,
    /// `τ^k R`
    pub radius: f64,
    /// `b_k / (τ^k R)^β` from iterating the extremal recursion.
    pub recursion: f64,
    /// `γ^k φ(R)/R^β + ε(1 − γ^k)/((1 − γ)τ^β)`
    pub closed_form: f64,
    /// `γ^k φ(R)/R^β + ε/((1 − γ)τ^β)`
    pub coefficient: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapCertificate {
    pub tau: f64,
    pub gamma: f64,
    pub phi_r: f64,
    pub levels: Vec<BootstrapLevel>,
    /// Sample-wise `φ(r) ≤ coefficient_k τ^{−β} r^β` for `r ∈ (τ^{k+1}R, τ^k R]`.
    pub bound_holds: bool,
    /// Smallest `1 − φ(r)/bound(r)` over the samples.
    pub margin: f64,
}

/// Iterates `φ(τr) ≤ cτ^α φ(r) + ε r^β = γτ^β φ(r) + ε r^β` from `r = R`
/// with `τ = min(1/2, (2c)^{−1/(α−β)})`, so that `γ = cτ^{α−β} < 1`.
///
/// `samples` are `(r, φ(r))` pairs of a non-decreasing `φ` on `(0, R]`; the
/// value at the largest sampled radius stands in for `φ(R)`.
pub fn bootstrap_exponent(samples: &[(f64, f64)], c: f64, alpha: f64, beta: f64, eps: f64, big_r: f64) -> Result<BootstrapCertificate> {
    if !(alpha > beta && beta > 0.0) {
        return Err(PhymError::Precondition(format!("need α > β > 0, got α = {alpha}, β = {beta}")));
    }
    if !(c > 0.0 && eps > 0.0 && big_r > 0.0) {
        return Err(PhymError::Precondition("c, ε and R must be positive".into()));
    }
    let in_range: Vec<(f64, f64)> = samples.iter().cloned().filter(|&(r, _)| r > 0.0 && r <= big_r).collect();
    let phi_r = in_range
        .iter()
        .cloned()
        .fold(None, |best: Option<(f64, f64)>, s| match best {
            Some(b) if b.0 >= s.0 => Some(b),
            _ => Some(s),
        })
        .map_or(0.0, |s| s.1);
    let tau = 0.5f64.min((2.0 * c).powf(-1.0 / (alpha - beta)));
    let gamma = c * tau.powf(alpha - beta);
    let tb = tau.powf(beta);
    let r_min = in_range.iter().map(|s| s.0).fold(big_r, f64::min);
    let depth = ((big_r / r_min).ln() / (1.0 / tau).ln()).ceil().max(0.0) as usize + 1;

    let mut levels = Vec::with_capacity(depth + 1);
    let mut b = phi_r;
    let mut radius = big_r;
    for k in 0..=depth {
        if k > 0 {
            b = gamma * tb * b + eps * radius.powf(beta);
            radius *= tau;
        }
        let gk = gamma.powi(k as i32);
        levels.push(BootstrapLevel {
            k,
            radius,
            recursion: b / radius.powf(beta),
            closed_form: gk * phi_r / big_r.powf(beta) + eps / tb * (1.0 - gk) / (1.0 - gamma),
            coefficient: gk * phi_r / big_r.powf(beta) + eps / ((1.0 - gamma) * tb),
        });
    }
    let mut margin = f64::INFINITY;
    for &(r, phi) in &in_range {
        let k = (((big_r / r).ln() / (1.0 / tau).ln()) + 1e-12).floor() as usize;
        let level = &levels[k.min(depth)];
        let bound = level.coefficient / tb * r.powf(beta);
        margin = margin.min(1.0 - phi / bound);
    }
    Ok(BootstrapCertificate { tau, gamma, phi_r, levels, bound_holds: margin >= 0.0, margin })
}

/// `f(L) ≤ (2A + f(0)) e^{−εL}` with `ε = min(δ, 1/(2B))`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayBound {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub f0: f64,
    pub eps: f64,
}

pub fn decay_ode_bound(a: f64, b: f64, delta: f64, f0: f64) -> Result<DecayBound> {
    if !(a >= 0.0 && b > 0.0 && delta > 0.0 && f0 >= 0.0) {
        return Err(PhymError::Precondition(format!("need A ≥ 0, B > 0, δ > 0, f(0) ≥ 0; got {a}, {b}, {delta}, {f0}")));
    }
    Ok(DecayBound { a, b, delta, f0, eps: delta.min(0.5 / b) })
}

impl DecayBound {
    pub fn bound(&self, l: f64) -> f64 {
        (2.0 * self.a + self.f0) * (-self.eps * l).exp()
    }

    /// Integrates the comparison equation `g' = −g/B`, `g(0) = −2A`, by RK4
    /// and checks `g ≤ 0` on `[0, l_max]`.
    pub fn verify_comparison(&self, l_max: f64, step: f64) -> bool {
        let rhs = |g: f64| -g / self.b;
        let mut g = -2.0 * self.a;
        let steps = (l_max / step).ceil() as usize;
        for _ in 0..steps {
            let k1 = rhs(g);
            let k2 = rhs(g + 0.5 * step * k1);
            let k3 = rhs(g + 0.5 * step * k2);
            let k4 = rhs(g + step * k3);
            g += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if g > 0.0 {
                return false;
            }
        }
        true
    }

    /// Number of samples `(L, f)` above the bound.
    pub fn violations(&self, samples: &[(f64, f64)]) -> usize {
        samples.iter().filter(|&&(l, f)| f > self.bound(l)).count()
    }
}

/// RK4 trajectory of `f' = (A e^{−δL} − (1 + θ(L)) f) / B` from `f(0) = f0`.
/// For `θ ≥ 0` and `f0 ≥ 0` it stays nonnegative and satisfies
/// `f ≤ A e^{−δL} − B f'`. Returns `(L, f, f')` samples.
pub fn comparison_trajectory(a: f64, b: f64, delta: f64, f0: f64, theta: impl Fn(f64) -> f64, l_max: f64, step: f64) -> Vec<(f64, f64, f64)> {
    let rhs = |l: f64, f: f64| (a * (-delta * l).exp() - (1.0 + theta(l)) * f) / b;
    let steps = (l_max / step).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut f = f0;
    for i in 0..=steps {
        let l = i as f64 * step;
        out.push((l, f, rhs(l, f)));
        if i == steps {
            break;
        }
        let k1 = rhs(l, f);
        let k2 = rhs(l + 0.5 * step, f + 0.5 * step * k1);
        let k3 = rhs(l + 0.5 * step, f + 0.5 * step * k2);
        let k4 = rhs(l + step, f + step * k3);
        f += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out
}
