//! Morrey, Campanato and Hölder quantities on lattice samples, harmonic
//! replacement, the growth and bootstrap lemmas, the Green-weighted dyadic
//! iteration and exponential decay fits on cylinders.
//!
//! Balls are centred at lattice points and contain the sites `y` with
//! `|y − x| ≤ r(1 + 1e−12)` (minimum image on periodic axes). Integrals over
//! a ball are sums of the domain quadrature weights.

mod decay;
mod green;
mod harmonic;
mod lemmas;

pub use decay::{decay_fit, decay_fit_window, rate_nondecreasing, DecayFit};
pub use green::{green_dyadic_iteration, GreenCertificate};
pub use harmonic::{field_decay, harmonic_replacement, phi_growth_check, phi_growth_on, DecayExponent, HarmonicReplacement, OscillationProfile};
pub use lemmas::{
    bootstrap_exponent, comparison_trajectory, decay_ode_bound, BootstrapCertificate, BootstrapLevel, DecayBound,
};

use crate::error::{PhymError, Result};
use crate::geometry::GridDomain;
use crate::matcalc::CMat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const BALL_TOL: f64 = 1e-12;
/// Pair budget of the exhaustive Hölder scan.
pub const HOLDER_PAIR_BUDGET: usize = 1_000_000;
const HOLDER_SEED: u64 = 0x5eed_4a11;

/// `f: U → ℝ^k` sampled on every site of a domain; `values[i*k + c]`.
#[derive(Clone, Debug)]
pub struct SampledFunction {
    pub domain: GridDomain,
    pub k: usize,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(domain: &GridDomain, k: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 || values.len() != k * domain.len() {
            return Err(PhymError::Validation(format!(
                "expected {} values for {k} components, got {}",
                k * domain.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PhymError::Validation("sampled function has non-finite values".into()));
        }
        Ok(SampledFunction { domain: domain.clone(), k, values })
    }

    pub fn from_fn(domain: &GridDomain, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let v = (0..domain.len()).map(|i| f(&domain.position(i))).collect();
        Self::new(domain, 1, v)
    }

    /// Real coordinates of Hermitian matrices, scaled so the Euclidean norm
    /// is the Frobenius norm.
    pub fn from_hermitian(domain: &GridDomain, s: &[CMat]) -> Result<Self> {
        let r = s.first().map_or(1, |m| m.rank());
        let mut values = Vec::with_capacity(s.len() * r * r);
        for m in s {
            for i in 0..r {
                values.push(m[(i, i)].re);
                for j in i + 1..r {
                    values.push(std::f64::consts::SQRT_2 * m[(i, j)].re);
                    values.push(std::f64::consts::SQRT_2 * m[(i, j)].im);
                }
            }
        }
        Self::new(domain, r * r, values)
    }

    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    /// Central-difference gradient (one-sided at box ends), `k·dim` components.
    pub fn gradient(&self) -> SampledFunction {
        let d = &self.domain;
        let kd = self.k * d.dim;
        let mut out = vec![0.0; d.len() * kd];
        for i in 0..d.len() {
            for a in 0..d.dim {
                let (lo, lo_w) = d.neighbor(i, a, -1).map_or((i, 0.0), |(j, _)| (j, 1.0));
                let (hi, hi_w) = d.neighbor(i, a, 1).map_or((i, 0.0), |(j, _)| (j, 1.0));
                let span = (lo_w + hi_w) * d.h[a];
                for c in 0..self.k {
                    out[i * kd + a * self.k + c] = (self.values[hi * self.k + c] - self.values[lo * self.k + c]) / span;
                }
            }
        }
        SampledFunction { domain: d.clone(), k: kd, values: out }
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        let v: Vec<f64> = (0..self.domain.len()).map(|i| euclid(self.at(i)).powf(p)).collect();
        self.domain.integrate(&v).powf(1.0 / p)
    }
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sites of `B_r(x_center)`, in increasing index order.
pub fn ball(d: &GridDomain, center: usize, r: f64) -> Vec<usize> {
    let c0 = d.coords(center);
    let lim = r * (1.0 + BALL_TOL);
    // per axis: (coordinate, |offset| in length units)
    let axes: Vec<Vec<(usize, f64)>> = (0..d.dim)
        .map(|a| {
            let p = d.points[a] as i64;
            let k = (lim / d.h[a]).floor() as i64;
            let c = c0[a] as i64;
            if d.is_periodic(a) && 2 * k + 1 >= p {
                (0..p)
                    .map(|j| {
                        let mut o = j - c;
                        o -= p * ((o as f64) / p as f64).round() as i64;
                        (j as usize, (o.abs() as f64) * d.h[a])
                    })
                    .collect()
            } else {
                (-k..=k)
                    .filter_map(|o| {
                        let j = c + o;
                        if d.is_periodic(a) {
                            Some((j.rem_euclid(p) as usize, (o.abs() as f64) * d.h[a]))
                        } else if (0..p).contains(&j) {
                            Some((j as usize, (o.abs() as f64) * d.h[a]))
                        } else {
                            None
                        }
                    })
                    .collect()
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut coord = vec![0usize; d.dim];
    walk(d, &axes, 0, 0.0, lim * lim, &mut coord, &mut out);
    out.sort_unstable();
    out
}

fn walk(d: &GridDomain, axes: &[Vec<(usize, f64)>], a: usize, acc: f64, lim2: f64, coord: &mut Vec<usize>, out: &mut Vec<usize>) {
    if a == axes.len() {
        out.push(d.index(coord));
        return;
    }
    for &(j, off) in &axes[a] {
        let acc2 = acc + off * off;
        if acc2 <= lim2 {
            coord[a] = j;
            walk(d, axes, a + 1, acc2, lim2, coord, out);
        }
    }
}

/// Dyadic radii `4h·2^j` up to a quarter of the diameter (at least one radius).
pub fn default_radii(d: &GridDomain) -> Vec<f64> {
    let hmax = d.h.iter().cloned().fold(0.0, f64::max);
    let diam = (0..d.dim)
        .map(|a| if d.is_periodic(a) { 0.5 * d.lengths[a] } else { d.lengths[a] })
        .map(|l| l * l)
        .sum::<f64>()
        .sqrt();
    let mut radii = vec![4.0 * hmax];
    while radii.last().unwrap() * 2.0 <= diam / 4.0 * (1.0 + BALL_TOL) {
        let next = radii.last().unwrap() * 2.0;
        radii.push(next);
    }
    radii
}

fn check_exponents(p: f64, lambda: f64) -> Result<()> {
    if !(p >= 1.0) || !(lambda >= 0.0) {
        return Err(PhymError::Precondition(format!("need p ≥ 1 and λ ≥ 0, got p = {p}, λ = {lambda}")));
    }
    Ok(())
}

fn ball_mass(f: &SampledFunction, sites: &[usize], p: f64, recentre: bool) -> f64 {
    let d = &f.domain;
    // deviations are taken from the first site so constants cancel exactly
    let base: Vec<f64> = if recentre { f.at(sites[0]).to_vec() } else { vec![0.0; f.k] };
    let mut mean = vec![0.0; f.k];
    if recentre {
        let mut wsum = 0.0;
        for &i in sites {
            let w = d.weight(i);
            wsum += w;
            for ((m, v), b) in mean.iter_mut().zip(f.at(i)).zip(&base) {
                *m += w * (v - b);
            }
        }
        mean.iter_mut().for_each(|m| *m /= wsum);
    }
    sites
        .iter()
        .map(|&i| {
            let dev: f64 = f.at(i).iter().zip(&mean).zip(&base).map(|((v, m), b)| (v - b - m).powi(2)).sum();
            d.weight(i) * dev.sqrt().powf(p)
        })
        .sum()
}

fn scaled_sup(f: &SampledFunction, p: f64, lambda: f64, radii: &[f64], recentre: bool) -> f64 {
    let d = &f.domain;
    let hmin = d.h.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut best: f64 = 0.0;
    for &r0 in radii {
        // radius floor: every ball reaches its nearest neighbours
        let r = r0.max(hmin);
        let scale = r.powf(-lambda);
        for x in 0..d.len() {
            let m = ball_mass(f, &ball(d, x, r), p, recentre);
            best = best.max((scale * m).powf(1.0 / p));
        }
    }
    best
}

/// `sup_{x,r} (r^{−λ} ∫_{B_r(x)∩U} |f|^p)^{1/p}` over lattice centres and the
/// default dyadic radii.
pub fn morrey_norm(f: &SampledFunction, p: f64, lambda: f64) -> Result<f64> {
    morrey_norm_on(f, p, lambda, &default_radii(&f.domain))
}

pub fn morrey_norm_on(f: &SampledFunction, p: f64, lambda: f64, radii: &[f64]) -> Result<f64> {
    check_exponents(p, lambda)?;
    Ok(scaled_sup(f, p, lambda, radii, false))
}

/// Like [`morrey_norm`] with `f − f̄_{x,r}` in place of `f`.
pub fn campanato_seminorm(f: &SampledFunction, p: f64, lambda: f64) -> Result<f64> {
    campanato_seminorm_on(f, p, lambda, &default_radii(&f.domain))
}

pub fn campanato_seminorm_on(f: &SampledFunction, p: f64, lambda: f64, radii: &[f64]) -> Result<f64> {
    check_exponents(p, lambda)?;
    Ok(scaled_sup(f, p, lambda, radii, true))
}

#[derive(Clone, Debug, Serialize)]
pub struct HolderReport {
    /// `max |f(x) − f(y)| / |x − y|^α` over the scanned pairs.
    pub holder: f64,
    /// `[f]_{𝓛^{2, dim+2α}}`
    pub campanato: f64,
    /// `holder / campanato`, zero when both vanish.
    pub ratio: f64,
    pub pairs: usize,
    pub exhaustive: bool,
}

/// Hölder seminorm next to the Campanato seminorm that controls it.
pub fn holder_from_campanato(f: &SampledFunction, alpha: f64) -> Result<HolderReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(PhymError::Precondition(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    let d = &f.domain;
    let n = d.len();
    let pos: Vec<Vec<f64>> = (0..n).map(|i| d.position(i)).collect();
    let quotient = |i: usize, j: usize| {
        let dist = d.distance(&pos[i], &pos[j]);
        let diff: f64 = f.at(i).iter().zip(f.at(j)).map(|(a, b)| (a - b) * (a - b)).sum();
        diff.sqrt() / dist.powf(alpha)
    };
    let total = n * (n - 1) / 2;
    let mut holder: f64 = 0.0;
    let exhaustive = total <= HOLDER_PAIR_BUDGET;
    let pairs = if exhaustive {
        for i in 0..n {
            for j in i + 1..n {
                holder = holder.max(quotient(i, j));
            }
        }
        total
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(HOLDER_SEED);
        let mut count = 0;
        while count < HOLDER_PAIR_BUDGET {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j {
                holder = holder.max(quotient(i, j));
                count += 1;
            }
        }
        count
    };
    let campanato = campanato_seminorm(f, 2.0, d.dim as f64 + 2.0 * alpha)?;
    let ratio = if campanato > 0.0 { holder / campanato } else { 0.0 };
    Ok(HolderReport { holder, campanato, ratio, pairs, exhaustive })
}
