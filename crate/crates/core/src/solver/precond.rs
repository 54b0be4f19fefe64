//! Fourier preconditioner for `½∇*∇ + shift` on a flat, possibly twisted
//! bundle, with Dirichlet rows on the ends of a cylinder axis.

use crate::error::{PhymError, Result};
use crate::fields::{EndoField, TwistBasis};
use crate::geometry::GridDomain;
use crate::matcalc::{CMat, C64};
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

pub struct FourierPreconditioner {
    domain: GridDomain,
    basis: TwistBasis,
    shift: f64,
    /// per non-trace mode: `e^{−2πi Σ θₐxₐ/Lₐ}` at each site
    phases: Vec<Vec<C64>>,
    plans: Vec<Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>>,
    open_axis: Option<usize>,
}

impl FourierPreconditioner {
    pub fn new(domain: &GridDomain, rank: usize, shift: f64) -> Result<Self> {
        let open: Vec<usize> = (0..domain.dim).filter(|&a| !domain.is_periodic(a)).collect();
        if open.len() > 1 {
            return Err(PhymError::Unsupported("preconditioner handles at most one non-periodic axis".into()));
        }
        let basis = TwistBasis::new(domain, rank)?;
        let phases = basis
            .modes
            .iter()
            .map(|m| {
                (0..domain.len())
                    .map(|i| {
                        let x = domain.position(i);
                        let arg: f64 = (0..domain.dim)
                            .filter(|&a| domain.is_periodic(a))
                            .map(|a| m.theta[a] * x[a] / domain.lengths[a])
                            .sum();
                        C64::from_polar(1.0, -2.0 * PI * arg)
                    })
                    .collect()
            })
            .collect();
        let mut planner = FftPlanner::new();
        let plans = (0..domain.dim)
            .map(|a| {
                domain.is_periodic(a).then(|| {
                    let n = domain.points[a];
                    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
                })
            })
            .collect();
        Ok(FourierPreconditioner { domain: domain.clone(), basis, shift, phases, plans, open_axis: open.first().copied() })
    }

    pub fn set_shift(&mut self, shift: f64) {
        self.shift = shift;
    }

    pub fn basis(&self) -> &TwistBasis {
        &self.basis
    }

    /// Least discrete symbol of `½∇*∇` over trace-free modes (periodic
    /// domains only).
    pub fn least_symbol(&self) -> f64 {
        let d = &self.domain;
        let mut best = f64::INFINITY;
        for m in self.basis.modes.iter().filter(|m| !m.is_trace()) {
            let s: f64 = (0..d.dim)
                .map(|a| {
                    let n = d.points[a] as i64;
                    (0..n).map(|k| axis_symbol(d, a, k, m.theta[a])).fold(f64::INFINITY, f64::min)
                })
                .sum();
            best = best.min(s);
        }
        best
    }

    fn transform(&self, data: &mut [C64], axis: usize, inverse: bool) {
        let (fwd, inv) = self.plans[axis].as_ref().expect("periodic axis");
        let plan = if inverse { inv } else { fwd };
        let d = &self.domain;
        let n = d.points[axis];
        let stride = d.strides_of(axis);
        let mut line = vec![C64::new(0.0, 0.0); n];
        for start in (0..d.len()).filter(|&i| d.coord(i, axis) == 0) {
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[start + k * stride];
            }
            plan.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                data[start + k * stride] = *v;
            }
        }
    }

    pub fn apply(&self, x: &[CMat]) -> EndoField {
        let d = &self.domain;
        let r = self.basis.rank;
        let mut out = vec![CMat::zeros(r); d.len()];
        let periodic: Vec<usize> = (0..d.dim).filter(|&a| d.is_periodic(a)).collect();
        let norm: f64 = periodic.iter().map(|&a| d.points[a] as f64).product();
        for (m, ph) in self.basis.modes.iter().zip(&self.phases) {
            if m.is_trace() {
                continue;
            }
            let mut c: Vec<C64> = (0..d.len()).map(|i| x[i].inner(&m.e) * ph[i]).collect();
            for &a in &periodic {
                self.transform(&mut c, a, false);
            }
            let perp = |i: usize| -> f64 {
                periodic.iter().map(|&a| axis_symbol(d, a, d.coord(i, a) as i64, m.theta[a])).sum::<f64>()
            };
            match self.open_axis {
                None => {
                    for (i, v) in c.iter_mut().enumerate() {
                        *v /= perp(i) + self.shift;
                    }
                }
                Some(a) => self.dirichlet_lines(&mut c, a, &perp),
            }
            for &a in &periodic {
                self.transform(&mut c, a, true);
            }
            for i in 0..d.len() {
                out[i] += m.e.scale_c(c[i] * ph[i].conj() / norm);
            }
        }
        out.into_iter().map(|v| v.herm_part().traceless()).collect()
    }

    /// Tridiagonal solve along the open axis: identity rows at both ends,
    /// `½(−δ²) + σ⊥ + shift` inside.
    fn dirichlet_lines(&self, c: &mut [C64], axis: usize, perp: &dyn Fn(usize) -> f64) {
        let d = &self.domain;
        let n = d.points[axis];
        let stride = d.strides_of(axis);
        let off = -0.5 / (d.h[axis] * d.h[axis]);
        for start in (0..d.len()).filter(|&i| d.coord(i, axis) == 0) {
            let diag = 2.0 * -off + perp(start) + self.shift;
            let mut cp = vec![0.0; n];
            let mut dp = vec![C64::new(0.0, 0.0); n];
            // row 0 is the identity
            cp[0] = 0.0;
            dp[0] = c[start];
            for k in 1..n {
                let (a, b, cc) = if k + 1 == n { (0.0, 1.0, 0.0) } else { (off, diag, off) };
                let den = b - a * cp[k - 1];
                cp[k] = cc / den;
                dp[k] = (c[start + k * stride] - dp[k - 1] * a) / den;
            }
            let mut next = dp[n - 1];
            c[start + (n - 1) * stride] = next;
            for k in (0..n - 1).rev() {
                next = dp[k] - next * cp[k];
                c[start + k * stride] = next;
            }
        }
    }
}

/// `½ (2/h)² sin²(π(k+θ)/N)` along a periodic axis.
fn axis_symbol(d: &GridDomain, axis: usize, k: i64, theta: f64) -> f64 {
    let n = d.points[axis] as f64;
    let h = d.h[axis];
    0.5 * (2.0 / h).powi(2) * (PI * (k as f64 + theta) / n).sin().powi(2)
}
