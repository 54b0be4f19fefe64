//! Second-order finite-difference stencils.

use super::{GridDomain, Wrap};
use crate::matcalc::{CMat, C64};
use std::ops::{Add, Mul, Sub};

/// Values that can live on lattice sites.
pub trait SiteValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero_like(&self) -> Self;
    fn transported(&self, _d: &GridDomain, _axis: usize, _w: Wrap) -> Self {
        *self
    }
}

impl SiteValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
}

impl SiteValue for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
}

impl SiteValue for CMat {
    fn zero_like(&self) -> Self {
        CMat::zeros(self.rank())
    }
    fn transported(&self, d: &GridDomain, axis: usize, w: Wrap) -> Self {
        d.transport(self, axis, w)
    }
}

/// (1,0)- or (0,1)-form: one component field per complex direction.
#[derive(Clone, Debug)]
pub struct FormField<T> {
    pub comps: Vec<Vec<T>>,
}

/// (1,1)-form with components `F_{jk̄}` stored at `j·n + k`.
#[derive(Clone, Debug)]
pub struct FormField11<T> {
    pub n: usize,
    pub comps: Vec<Vec<T>>,
}

impl<T: SiteValue> FormField11<T> {
    pub fn get(&self, j: usize, k: usize) -> &[T] {
        &self.comps[j * self.n + k]
    }
}

impl GridDomain {
    #[inline]
    fn nb<T: SiteValue>(&self, f: &[T], idx: usize, axis: usize, dir: i32) -> Option<T> {
        self.neighbor(idx, axis, dir).map(|(j, w)| f[j].transported(self, axis, w))
    }

    /// Value `steps` sites away along a non-periodic axis (no wrapping).
    fn along<T: SiteValue>(&self, f: &[T], idx: usize, axis: usize, steps: i64) -> T {
        let s = self.strides_of(axis) as i64;
        f[(idx as i64 + steps * s) as usize]
    }

    pub(crate) fn strides_of(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// First derivative at one site: central, or one-sided second order at ends.
    #[inline]
    pub fn deriv_at<T: SiteValue>(&self, f: &[T], idx: usize, axis: usize) -> T {
        let h = self.h[axis];
        match (self.nb(f, idx, axis, 1), self.nb(f, idx, axis, -1)) {
            (Some(p), Some(m)) => (p - m) * (0.5 / h),
            (Some(_), None) => {
                let (f0, f1, f2) = (f[idx], self.along(f, idx, axis, 1), self.along(f, idx, axis, 2));
                (f1 * 4.0 - f0 * 3.0 - f2) * (0.5 / h)
            }
            (None, Some(_)) => {
                let (f0, f1, f2) = (f[idx], self.along(f, idx, axis, -1), self.along(f, idx, axis, -2));
                (f0 * 3.0 - f1 * 4.0 + f2) * (0.5 / h)
            }
            (None, None) => unreachable!("axis with fewer than 3 points"),
        }
    }

    pub fn deriv<T: SiteValue>(&self, f: &[T], axis: usize) -> Vec<T> {
        (0..self.len()).map(|i| self.deriv_at(f, i, axis)).collect()
    }

    /// Compact second derivative at one site.
    #[inline]
    pub fn second_deriv_at<T: SiteValue>(&self, f: &[T], idx: usize, axis: usize) -> T {
        let h2 = self.h[axis] * self.h[axis];
        match (self.nb(f, idx, axis, 1), self.nb(f, idx, axis, -1)) {
            (Some(p), Some(m)) => (p + m - f[idx] * 2.0) * (1.0 / h2),
            (Some(_), None) => {
                let g = |k| self.along(f, idx, axis, k);
                (f[idx] * 2.0 - g(1) * 5.0 + g(2) * 4.0 - g(3)) * (1.0 / h2)
            }
            (None, Some(_)) => {
                let g = |k| self.along(f, idx, axis, k);
                (f[idx] * 2.0 - g(-1) * 5.0 + g(-2) * 4.0 - g(-3)) * (1.0 / h2)
            }
            (None, None) => unreachable!("axis with fewer than 3 points"),
        }
    }

    pub fn second_deriv<T: SiteValue>(&self, f: &[T], axis: usize) -> Vec<T> {
        (0..self.len()).map(|i| self.second_deriv_at(f, i, axis)).collect()
    }

    /// `Δf = −Σₐ ∂ₐ² f`
    pub fn laplacian<T: SiteValue>(&self, f: &[T]) -> Vec<T> {
        (0..self.len())
            .map(|i| {
                let mut acc = f[i].zero_like();
                for a in 0..self.dim {
                    acc = acc - self.second_deriv_at(f, i, a);
                }
                acc
            })
            .collect()
    }

    /// `∂_{z_k} = ½(∂_{x_{2k}} − i∂_{x_{2k+1}})` for all `k`.
    pub fn d_z(&self, f: &[C64]) -> FormField<C64> {
        self.complex_deriv(f, -1.0)
    }

    /// `∂_{z̄_k} = ½(∂_{x_{2k}} + i∂_{x_{2k+1}})` for all `k`.
    pub fn d_zbar(&self, f: &[C64]) -> FormField<C64> {
        self.complex_deriv(f, 1.0)
    }

    fn complex_deriv(&self, f: &[C64], sign: f64) -> FormField<C64> {
        let i = C64::new(0.0, sign);
        let comps = (0..self.n())
            .map(|k| {
                let dx = self.deriv(f, 2 * k);
                let dy = self.deriv(f, 2 * k + 1);
                dx.iter().zip(&dy).map(|(a, b)| (*a + i * *b) * 0.5).collect()
            })
            .collect();
        FormField { comps }
    }

    /// Endomorphism version of `∂_{z_k}` (sign −1) or `∂_{z̄_k}` (sign +1).
    pub fn complex_deriv_endo(&self, f: &[CMat], k: usize, sign: f64) -> Vec<CMat> {
        let i = C64::new(0.0, sign);
        let dx = self.deriv(f, 2 * k);
        let dy = self.deriv(f, 2 * k + 1);
        dx.iter().zip(&dy).map(|(a, b)| (*a + b.scale_c(i)) * 0.5).collect()
    }

    /// The form `∂∂̄f` with coefficients `∂_{z_j}∂_{z̄_k} f`.
    pub fn ddbar(&self, f: &[C64]) -> FormField11<C64> {
        let n = self.n();
        let db = self.d_zbar(f);
        let mut comps = vec![Vec::new(); n * n];
        for k in 0..n {
            let dz = self.d_z(&db.comps[k]);
            for j in 0..n {
                comps[j * n + k] = dz.comps[j].clone();
            }
        }
        FormField11 { n, comps }
    }

    /// `iΛF = 2 Σ_k F_{kk̄}`
    pub fn lambda_contract<T: SiteValue>(&self, form: &FormField11<T>) -> Vec<T> {
        let n = form.n;
        (0..self.len())
            .map(|i| {
                let mut acc = form.comps[0][i] * 0.0;
                for k in 0..n {
                    acc = acc + form.comps[k * n + k][i] * 2.0;
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn wave(d: &GridDomain) -> Vec<C64> {
        (0..d.len())
            .map(|i| {
                let x = d.position(i);
                C64::from_polar(1.0, 2.0 * PI * x[0])
            })
            .collect()
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let d = GridDomain::unit_torus(1, 8);
        let f = vec![C64::new(3.0, -1.0); d.len()];
        assert!(d.d_z(&f).comps[0].iter().all(|z| z.norm() < 1e-12));
        assert!(d.laplacian(&f).iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn laplacian_symbol_is_exact() {
        let m = 16;
        let d = GridDomain::unit_torus(1, m);
        let f = wave(&d);
        let h = 1.0 / m as f64;
        let sym = (2.0 / h * (PI * h).sin()).powi(2);
        for (l, v) in d.laplacian(&f).iter().zip(&f) {
            assert!((*l - *v * sym).norm() < 1e-9);
        }
    }

    #[test]
    fn one_sided_ends_are_second_order_exact_on_quadratics() {
        let d = GridDomain::boxed(&[1.0], &[9]).unwrap();
        let f: Vec<f64> = (0..d.len()).map(|i| d.position(i)[0].powi(2)).collect();
        let df = d.deriv(&f, 0);
        let d2 = d.second_deriv(&f, 0);
        for i in 0..d.len() {
            let x = d.position(i)[0];
            assert!((df[i] - 2.0 * x).abs() < 1e-12);
            assert!((d2[i] - 2.0).abs() < 1e-9);
        }
    }
}
