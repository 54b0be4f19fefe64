//! Exponential decay of fields along the cylinder axis.

use crate::error::{PhymError, Result};
use crate::geometry::{DomainKind, GridDomain};
use crate::matcalc::CMat;
use serde::Serialize;

/// Rates below this count as non-decaying.
const DECAY_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    /// `−d/dℓ log sup_{slice}|s|` from a least-squares line.
    pub rate: f64,
    pub prefactor: f64,
    /// `(ℓ, sup |s|)` per slice inside the window.
    pub samples: Vec<(f64, f64)>,
    pub window: (f64, f64),
    pub decaying: bool,
}

/// Fit over the middle third of the cylinder.
pub fn decay_fit(d: &GridDomain, s: &[CMat]) -> Result<DecayFit> {
    let l = d.lengths[0];
    decay_fit_window(d, s, l / 3.0, 2.0 * l / 3.0)
}

pub fn decay_fit_window(d: &GridDomain, s: &[CMat], lo: f64, hi: f64) -> Result<DecayFit> {
    if d.kind != DomainKind::Cylinder {
        return Err(PhymError::Unsupported("decay fits need a cylinder domain".into()));
    }
    if s.len() != d.len() {
        return Err(PhymError::Validation("field length does not match the domain".into()));
    }
    let n = d.points[0];
    let slice = d.len() / n;
    let tol = 1e-9 * d.h[0];
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|k| (k as f64 * d.h[0], k))
        .filter(|&(ell, _)| ell >= lo - tol && ell <= hi + tol)
        .map(|(ell, k)| (ell, (k * slice..(k + 1) * slice).map(|i| s[i].norm()).fold(0.0, f64::max)))
        .collect();
    let pts: Vec<(f64, f64)> = samples.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x, y.ln())).collect();
    if pts.len() < 2 {
        return Ok(DecayFit { rate: 0.0, prefactor: 0.0, samples, window: (lo, hi), decaying: false });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rate = -slope;
    let prefactor = (my - slope * mx).exp();
    Ok(DecayFit { rate, prefactor, samples, window: (lo, hi), decaying: rate > DECAY_FLOOR })
}

/// A refinement pass must not lower the fitted rate by more than `tol`
/// (relative).
pub fn rate_nondecreasing(coarse: &DecayFit, fine: &DecayFit, tol: f64) -> bool {
    fine.rate >= coarse.rate * (1.0 - tol)
}
