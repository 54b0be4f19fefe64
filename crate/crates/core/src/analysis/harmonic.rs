//! Harmonic replacement on lattice balls and oscillation growth of gradients.

use super::{ball, default_radii, SampledFunction};
use crate::error::{PhymError, Result};
use crate::geometry::GridDomain;
use serde::Serialize;
use std::collections::HashMap;

/// `f = g + h` on `B_r(x)` with `h` discrete-harmonic inside and `h = f` on
/// the boundary ring.
#[derive(Clone, Debug)]
pub struct HarmonicReplacement {
    pub center: usize,
    pub radius: f64,
    pub k: usize,
    /// Ball sites in increasing order.
    pub sites: Vec<usize>,
    /// Whether all `2·dim` neighbours of a site lie in the ball.
    pub interior: Vec<bool>,
    /// `h[j*k + c]` for `sites[j]`.
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    /// `max |Δh|` over interior sites.
    pub residual: f64,
    pub iterations: usize,
}

struct BallLaplacian {
    /// Per interior unknown: diagonal and `(neighbour ball slot, coefficient)`.
    diag: Vec<f64>,
    links: Vec<Vec<(usize, f64)>>,
    unknown: Vec<usize>,
}

fn ball_laplacian(d: &GridDomain, sites: &[usize]) -> (Vec<bool>, BallLaplacian) {
    let slot: HashMap<usize, usize> = sites.iter().enumerate().map(|(j, &s)| (s, j)).collect();
    let mut interior = vec![false; sites.len()];
    let mut diag = Vec::new();
    let mut links = Vec::new();
    let mut unknown = Vec::new();
    for (j, &s) in sites.iter().enumerate() {
        let mut nb = Vec::with_capacity(2 * d.dim);
        let mut dg = 0.0;
        let mut inside = true;
        for a in 0..d.dim {
            let c = 1.0 / (d.h[a] * d.h[a]);
            for dir in [-1, 1] {
                match d.neighbor(s, a, dir).and_then(|(t, _)| slot.get(&t)) {
                    Some(&t) => nb.push((t, c)),
                    None => inside = false,
                }
            }
            dg += 2.0 * c;
        }
        if inside {
            interior[j] = true;
            diag.push(dg);
            links.push(nb);
            unknown.push(j);
        }
    }
    (interior, BallLaplacian { diag, links, unknown })
}

/// Dirichlet harmonic extension of `f` restricted to the boundary ring of
/// `B_r(x)`, solved by conjugate gradients.
pub fn harmonic_replacement(f: &SampledFunction, center: usize, r: f64) -> Result<HarmonicReplacement> {
    let d = &f.domain;
    if d.dim == 0 || r <= 0.0 {
        return Err(PhymError::Precondition("radius must be positive".into()));
    }
    if (0..d.dim).any(|a| d.is_periodic(a)) && r >= d.injectivity_radius() {
        return Err(PhymError::Domain(format!("ball radius {r} wraps around the torus")));
    }
    let sites = ball(d, center, r);
    if sites.iter().any(|&s| d.on_boundary(s)) {
        return Err(PhymError::Domain("ball must lie inside the domain".into()));
    }
    let (interior, lap) = ball_laplacian(d, &sites);
    if lap.unknown.is_empty() {
        return Err(PhymError::Resolution(format!("ball of radius {r} has no interior sites")));
    }
    let k = f.k;
    let nu = lap.unknown.len();
    let mut pos = vec![usize::MAX; sites.len()];
    for (u, &j) in lap.unknown.iter().enumerate() {
        pos[j] = u;
    }
    let mut h = vec![0.0; sites.len() * k];
    for (j, &s) in sites.iter().enumerate() {
        if !interior[j] {
            h[j * k..(j + 1) * k].copy_from_slice(f.at(s));
        }
    }
    let mut iterations = 0;
    let diag_max = lap.diag.iter().cloned().fold(0.0, f64::max);
    let fmax = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // the residual cannot drop below the roundoff of the stencil itself
    let tol = 1e-11f64.max(4.0 * f64::EPSILON * diag_max * fmax);
    for c in 0..k {
        // (−Δ) u = b with boundary values moved to the right-hand side
        let mut b = vec![0.0; nu];
        for (u, links) in lap.links.iter().enumerate() {
            for &(t, w) in links {
                if !interior[t] {
                    b[u] += w * h[t * k + c];
                }
            }
        }
        let apply = |x: &[f64], y: &mut [f64]| {
            for u in 0..nu {
                let mut acc = lap.diag[u] * x[u];
                for &(t, w) in &lap.links[u] {
                    if interior[t] {
                        acc -= w * x[pos[t]];
                    }
                }
                y[u] = acc;
            }
        };
        let guess: Vec<f64> = lap.unknown.iter().map(|&j| f.at(sites[j])[c]).collect();
        let (x, its) = conjugate_gradient(apply, &b, guess, tol, 20 * nu + 100)?;
        iterations = iterations.max(its);
        for (u, &j) in lap.unknown.iter().enumerate() {
            h[j * k + c] = x[u];
        }
    }
    let mut residual: f64 = 0.0;
    for (u, &j) in lap.unknown.iter().enumerate() {
        for c in 0..k {
            let mut acc = lap.diag[u] * h[j * k + c];
            for &(t, w) in &lap.links[u] {
                acc -= w * h[t * k + c];
            }
            residual = residual.max(acc.abs());
        }
    }
    let g = sites
        .iter()
        .enumerate()
        .flat_map(|(j, &s)| (0..k).map(move |c| (j, s, c)))
        .map(|(j, s, c)| f.at(s)[c] - h[j * k + c])
        .collect();
    Ok(HarmonicReplacement { center, radius: r, k, sites, interior, h, g, residual, iterations })
}

/// Plain CG stopping at `‖Ax − b‖_∞ ≤ tol`, restarted from the true
/// residual whenever the recurrence has drifted away from it.
fn conjugate_gradient(apply: impl Fn(&[f64], &mut [f64]), b: &[f64], mut x: Vec<f64>, tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let mut ax = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut total = 0;
    for _restart in 0..8 {
        apply(&x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        if r.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= tol {
            return Ok((x, total));
        }
        let mut p = r.clone();
        let mut rr: f64 = r.iter().map(|v| v * v).sum();
        // aim below the target so the true residual lands under it
        while total < max_iter && r.iter().fold(0.0f64, |m, v| m.max(v.abs())) > 0.25 * tol {
            total += 1;
            apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if !(pap > 0.0) {
                break;
            }
            let alpha = rr / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new: f64 = r.iter().map(|v| v * v).sum();
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
    }
    apply(&x, &mut ax);
    let res = b.iter().zip(&ax).fold(0.0f64, |m, (b, a)| m.max((b - a).abs()));
    if res <= tol {
        Ok((x, total))
    } else {
        Err(PhymError::Numeric(format!("harmonic replacement did not converge: residual {res:e}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayExponent {
    pub radii: Vec<f64>,
    /// `∫_{B_s} |v − v̄|²` per radius.
    pub energies: Vec<f64>,
    /// Least-squares slope of `log E` against `log s`.
    pub exponent: f64,
}

/// Campanato energies of a full-domain field `values` (`k` per site) on balls
/// around `center`.
pub fn field_decay(d: &GridDomain, values: &[f64], k: usize, center: usize, radii: &[f64]) -> DecayExponent {
    let energies: Vec<f64> = radii
        .iter()
        .map(|&s| {
            let sites = ball(d, center, s);
            let mut mean = vec![0.0; k];
            let mut wsum = 0.0;
            for &i in &sites {
                let w = d.weight(i);
                wsum += w;
                for c in 0..k {
                    mean[c] += w * values[i * k + c];
                }
            }
            mean.iter_mut().for_each(|m| *m /= wsum);
            sites
                .iter()
                .map(|&i| d.weight(i) * (0..k).map(|c| (values[i * k + c] - mean[c]).powi(2)).sum::<f64>())
                .sum()
        })
        .collect();
    let exponent = log_slope(radii, &energies);
    DecayExponent { radii: radii.to_vec(), energies, exponent }
}

pub(crate) fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, &y)| y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

impl HarmonicReplacement {
    /// `h` (or its central-difference gradient) spread over the whole domain,
    /// zero off the ball.
    pub fn full_field(&self, d: &GridDomain, gradient: bool) -> (Vec<f64>, usize) {
        let k = self.k;
        let mut hv = vec![0.0; d.len() * k];
        for (j, &s) in self.sites.iter().enumerate() {
            hv[s * k..(s + 1) * k].copy_from_slice(&self.h[j * k..(j + 1) * k]);
        }
        if !gradient {
            return (hv, k);
        }
        let kd = k * d.dim;
        let mut gv = vec![0.0; d.len() * kd];
        for (j, &s) in self.sites.iter().enumerate() {
            if !self.interior[j] {
                continue;
            }
            for a in 0..d.dim {
                let lo = d.neighbor(s, a, -1).unwrap().0;
                let hi = d.neighbor(s, a, 1).unwrap().0;
                for c in 0..k {
                    gv[s * kd + a * k + c] = (hv[hi * k + c] - hv[lo * k + c]) / (2.0 * d.h[a]);
                }
            }
        }
        (gv, kd)
    }

    /// Decay of `∫_{B_s}|h − h̄|²` (or of `∇h`) at `s = q·r`; fractions must
    /// stay at or below `1/2` for the gradient version.
    pub fn campanato_decay(&self, d: &GridDomain, fractions: &[f64], gradient: bool) -> DecayExponent {
        let (v, k) = self.full_field(d, gradient);
        let radii: Vec<f64> = fractions.iter().map(|q| q * self.radius).collect();
        field_decay(d, &v, k, self.center, &radii)
    }
}

/// `φ(r) = sup_x ∫_{B_r(x)} |∇f − mean|²` with a power-law fit.
#[derive(Clone, Debug, Serialize)]
pub struct OscillationProfile {
    pub radii: Vec<f64>,
    pub phi: Vec<f64>,
    pub exponent: f64,
    /// `max_{s<r} φ(s) / ((s/r)^{exponent} φ(r))`
    pub c: f64,
    /// RMS relative misfit of the power law.
    pub fit_residual: f64,
    pub monotone: bool,
    /// `exponent ≥ dim + 2 − 1/2`
    pub passes: bool,
}

pub fn phi_growth_check(f: &SampledFunction) -> Result<OscillationProfile> {
    let radii = default_radii(&f.domain);
    phi_growth_on(f, &radii)
}

pub fn phi_growth_on(f: &SampledFunction, radii: &[f64]) -> Result<OscillationProfile> {
    let d = &f.domain;
    let grad = f.gradient();
    let mut phi = Vec::with_capacity(radii.len());
    let mut used = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best: Option<f64> = None;
        for x in 0..d.len() {
            let sites = ball(d, x, r);
            // one-sided gradients at box faces are excluded from the sup
            if sites.iter().any(|&s| d.on_boundary(s)) {
                continue;
            }
            let e = field_decay(d, &grad.values, grad.k, x, &[r]).energies[0];
            best = Some(best.map_or(e, |b: f64| b.max(e)));
        }
        if let Some(b) = best {
            used.push(r);
            phi.push(b);
        }
    }
    if used.len() < 2 {
        return Err(PhymError::Resolution("need two radii with admissible balls".into()));
    }
    let exponent = log_slope(&used, &phi);
    let monotone = phi.windows(2).all(|w| w[1] >= w[0]);
    let mut c: f64 = 0.0;
    for i in 0..used.len() {
        for j in i + 1..used.len() {
            if phi[j] > 0.0 {
                c = c.max(phi[i] / ((used[i] / used[j]).powf(exponent) * phi[j]));
            }
        }
    }
    let pts: Vec<(f64, f64)> = used.iter().zip(&phi).filter(|(_, &p)| p > 0.0).map(|(&r, &p)| (r, p)).collect();
    let fit_residual = if pts.is_empty() {
        0.0
    } else {
        let n = pts.len() as f64;
        let log_a = pts.iter().map(|(r, p)| p.ln() - exponent * r.ln()).sum::<f64>() / n;
        (pts.iter().map(|(r, p)| ((log_a + exponent * r.ln()).exp() / p - 1.0).powi(2)).sum::<f64>() / n).sqrt()
    };
    let passes = exponent >= d.dim as f64 + 1.5;
    Ok(OscillationProfile { radii: used, phi, exponent, c, fit_residual, monotone, passes })
}
