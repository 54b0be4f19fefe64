//! Joint eigenbasis of the twist actions `X ↦ TₐXTₐ†` on `gl(r)`.
//!
//! A field component along a basis element `E` with character
//! `e^{2πiθₐ}` on axis `a` is quasi-periodic: `c(x + Lₐ) = e^{2πiθₐ}c(x)`.

use crate::error::{PhymError, Result};
use crate::geometry::GridDomain;
use crate::matcalc::{CMat, C64};
use nalgebra::DMatrix;
use rand::Rng;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct TwistMode {
    /// Frobenius-normalized basis matrix.
    pub e: CMat,
    /// Phase `θₐ ∈ [0,1)` per axis (zero on untwisted and non-periodic axes).
    pub theta: Vec<f64>,
}

impl TwistMode {
    /// True for the mode spanned by the identity (pure trace).
    pub fn is_trace(&self) -> bool {
        self.e.trace().norm() > 1e-8
    }
}

#[derive(Clone, Debug)]
pub struct TwistBasis {
    pub rank: usize,
    pub modes: Vec<TwistMode>,
}

impl TwistBasis {
    pub fn new(domain: &GridDomain, rank: usize) -> Result<Self> {
        let dim = rank * rank;
        let units: Vec<CMat> = (0..dim).map(|k| CMat::unit(rank, k / rank, k % rank)).collect();
        let act = |t: &CMat| -> DMatrix<C64> {
            DMatrix::from_fn(dim, dim, |row, col| {
                let m = *t * units[col] * t.adjoint();
                m[(row / rank, row % rank)]
            })
        };
        let twisted: Vec<(usize, DMatrix<C64>)> =
            (0..domain.dim).filter_map(|a| domain.twist_on(a).map(|t| (a, act(t)))).collect();
        // a fixed generic combination of the commuting normal operators
        let coeffs = [0.731_214, 0.418_193, 0.297_551, 0.881_907, 0.153_262, 0.604_418];
        let mut herm = DMatrix::<C64>::zeros(dim, dim);
        for (k, (_, m)) in twisted.iter().enumerate() {
            let adj = m.adjoint();
            let re = (m + &adj) * C64::new(0.5, 0.0);
            let im = (m - &adj) * C64::new(0.0, -0.5);
            herm += re * C64::new(coeffs[(2 * k) % 6], 0.0) + im * C64::new(coeffs[(2 * k + 1) % 6], 0.0);
        }
        // isolate the identity direction so exactly one mode carries trace
        let id = DMatrix::<C64>::from_fn(dim, 1, |k, _| {
            if k / rank == k % rank {
                C64::new(1.0 / (rank as f64).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        herm += &id * id.adjoint() * C64::new(16.0, 0.0);
        let vecs = herm.symmetric_eigen().eigenvectors;
        let mut modes = Vec::with_capacity(dim);
        for c in 0..dim {
            let e = CMat::from_fn(rank, |i, j| vecs[(i * rank + j, c)]);
            let e = e.scale(1.0 / e.norm());
            let mut theta = vec![0.0; domain.dim];
            for a in 0..domain.dim {
                if let Some(t) = domain.twist_on(a) {
                    let img = *t * e * t.adjoint();
                    let mu = img.inner(&e);
                    if (img - e.scale_c(mu)).norm() > 1e-9 {
                        return Err(PhymError::Config(format!(
                            "twist matrices do not act by commuting characters on axis {a}"
                        )));
                    }
                    theta[a] = (mu.arg() / (2.0 * PI)).rem_euclid(1.0);
                    if (theta[a] - 1.0).abs() < 1e-12 {
                        theta[a] = 0.0;
                    }
                }
            }
            modes.push(TwistMode { e, theta });
        }
        modes.sort_by_key(|m| !m.is_trace());
        Ok(TwistBasis { rank, modes })
    }

    /// True when no trace-free constant endomorphism is invariant under all twists.
    pub fn is_simple(&self) -> bool {
        !self.modes.iter().any(|m| !m.is_trace() && m.theta.iter().all(|&t| t == 0.0))
    }

    /// Random smooth Hermitian traceless field compatible with the twists,
    /// built from Fourier modes `|m|∞ ≤ max_mode` with amplitudes decaying
    /// like `1/(1+|m|²)`.
    pub fn random_field<R: Rng>(&self, domain: &GridDomain, rng: &mut R, max_mode: i32, amplitude: f64) -> Vec<CMat> {
        let r = self.rank;
        let mut out = vec![CMat::zeros(r); domain.len()];
        let ranges: Vec<Vec<i32>> = (0..domain.dim)
            .map(|a| if domain.is_periodic(a) { (-max_mode..=max_mode).collect() } else { (0..=max_mode).collect() })
            .collect();
        let mut terms: Vec<(CMat, Vec<f64>, f64)> = Vec::new();
        for mode in &self.modes {
            if mode.is_trace() {
                continue;
            }
            for_each_multi(&ranges, &mut |m| {
                let k2: f64 = m.iter().map(|&x| (x * x) as f64).sum();
                let amp = amplitude / (1.0 + k2);
                let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
                let phase0: f64 = rng.gen_range(0.0..2.0 * PI);
                let freq: Vec<f64> = (0..domain.dim)
                    .map(|a| {
                        if domain.is_periodic(a) {
                            2.0 * PI * (m[a] as f64 + mode.theta[a]) / domain.lengths[a]
                        } else {
                            PI * m[a] as f64 / domain.lengths[a]
                        }
                    })
                    .collect();
                terms.push((mode.e.scale_c(c), freq, phase0));
            });
        }
        for (i, v) in out.iter_mut().enumerate() {
            let x = domain.position(i);
            let mut acc = CMat::zeros(r);
            for (e, freq, ph) in &terms {
                let arg: f64 = freq.iter().zip(&x).map(|(f, xi)| f * xi).sum::<f64>() + ph;
                acc += e.scale_c(C64::from_polar(1.0, arg));
            }
            *v = (acc + acc.adjoint()).scale(0.5).traceless();
        }
        out
    }
}

fn for_each_multi(ranges: &[Vec<i32>], f: &mut impl FnMut(&[i32])) {
    let mut idx = vec![0usize; ranges.len()];
    let mut cur: Vec<i32> = ranges.iter().map(|r| r[0]).collect();
    loop {
        f(&cur);
        let mut a = 0;
        loop {
            if a == ranges.len() {
                return;
            }
            idx[a] += 1;
            if idx[a] < ranges[a].len() {
                cur[a] = ranges[a][idx[a]];
                break;
            }
            idx[a] = 0;
            cur[a] = ranges[a][0];
            a += 1;
        }
    }
}

/// Heisenberg pair for rank `r`: clock `U = diag(ωᵏ)` and shift `V eₖ = e_{k+1}`.
pub fn heisenberg_pair(r: usize) -> (CMat, CMat) {
    let w = 2.0 * PI / r as f64;
    let u = CMat::from_fn(r, |i, j| if i == j { C64::from_polar(1.0, w * i as f64) } else { C64::new(0.0, 0.0) });
    let v = CMat::from_fn(r, |i, j| if i == (j + 1) % r { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    (u, v)
}
