//! Flat lattice model domains with complex structure.
//!
//! Real axes are numbered `0..dim`; complex coordinate `k` is
//! `z_k = x_{2k} + i x_{2k+1}`. The Kähler form is `ω = (i/2) Σ dz_k ∧ dz̄_k`,
//! so that `iΛ(Σ F_{jk̄} dz_j ∧ dz̄_k) = 2 Σ_k F_{kk̄}`. The Laplacian is the
//! positive one, `Δ = −Σ ∂²`.
//!
//! Endomorphism fields on a twisted domain obey `f(x + Lₐeₐ) = Tₐ f(x) Tₐ†`;
//! neighbour fetches across a periodic face apply that rule.

mod dump;
mod stencil;

pub use dump::{read_dump, write_dump, DumpHeader};
pub use stencil::{FormField11, FormField};

use crate::error::{PhymError, Result};
use crate::matcalc::CMat;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Torus,
    Cylinder,
    /// Non-periodic box of any real dimension (used by the analysis tools).
    Box,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CylinderParams {
    pub length: f64,
    pub delta_v: f64,
    pub delta_e: f64,
    pub delta_h: f64,
}

/// How a neighbour value must be transformed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wrap {
    Plain,
    /// crossed the far face forwards: `T f T†`
    Fwd,
    /// crossed the near face backwards: `T† f T`
    Bwd,
}

#[derive(Clone, Debug)]
pub struct GridDomain {
    pub kind: DomainKind,
    pub dim: usize,
    pub lengths: Vec<f64>,
    pub points: Vec<usize>,
    pub h: Vec<f64>,
    pub twist: Option<Vec<Option<CMat>>>,
    pub cylinder: Option<CylinderParams>,
    strides: Vec<usize>,
    len: usize,
}

impl GridDomain {
    /// Flat torus `Πₐ ℝ/Lₐℤ` of complex dimension `n`.
    pub fn torus(n: usize, lengths: &[f64], points: &[usize]) -> Result<Self> {
        if lengths.len() != 2 * n || points.len() != 2 * n {
            return Err(PhymError::Config(format!("torus of complex dimension {n} needs {} axes", 2 * n)));
        }
        let h = lengths.iter().zip(points).map(|(l, &p)| l / p as f64).collect();
        Self::build(DomainKind::Torus, lengths.to_vec(), points.to_vec(), h, None)
    }

    /// Unit square torus with `m` points per axis.
    pub fn unit_torus(n: usize, m: usize) -> Self {
        Self::torus(n, &vec![1.0; 2 * n], &vec![m; 2 * n]).expect("valid unit torus")
    }

    /// `[0, L] × S¹ × T^{2n−2}`; axis 0 is the cylinder coordinate and its
    /// point count includes both end faces.
    pub fn cylinder(n: usize, params: CylinderParams, cross_lengths: &[f64], points: &[usize]) -> Result<Self> {
        if cross_lengths.len() != 2 * n - 1 || points.len() != 2 * n {
            return Err(PhymError::Config("cylinder axis counts do not match complex dimension".into()));
        }
        if points[0] < 4 {
            return Err(PhymError::Config("cylinder needs at least 4 points along its length".into()));
        }
        let mut lengths = vec![params.length];
        lengths.extend_from_slice(cross_lengths);
        let mut h = vec![params.length / (points[0] - 1) as f64];
        h.extend(cross_lengths.iter().zip(&points[1..]).map(|(l, &p)| l / p as f64));
        let mut d = Self::build(DomainKind::Cylinder, lengths, points.to_vec(), h, None)?;
        d.cylinder = Some(params);
        Ok(d)
    }

    /// Non-periodic box `Πₐ [0, Lₐ]` with end points included.
    pub fn boxed(lengths: &[f64], points: &[usize]) -> Result<Self> {
        if points.iter().any(|&p| p < 3) {
            return Err(PhymError::Config("box axes need at least 3 points".into()));
        }
        let h = lengths.iter().zip(points).map(|(l, &p)| l / (p - 1) as f64).collect();
        Self::build(DomainKind::Box, lengths.to_vec(), points.to_vec(), h, None)
    }

    fn build(kind: DomainKind, lengths: Vec<f64>, points: Vec<usize>, h: Vec<f64>, twist: Option<Vec<Option<CMat>>>) -> Result<Self> {
        if points.iter().any(|&p| p < 3) {
            return Err(PhymError::Config("every axis needs at least 3 points".into()));
        }
        if lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(PhymError::Config("axis lengths must be positive".into()));
        }
        let dim = points.len();
        let mut strides = vec![1; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * points[a + 1];
        }
        let len = points.iter().product();
        Ok(GridDomain { kind, dim, lengths, points, h, twist, cylinder: None, strides, len })
    }

    /// Attaches constant unitary transition matrices to periodic axes.
    pub fn with_twist(mut self, twist: Vec<Option<CMat>>) -> Result<Self> {
        if twist.len() != self.dim {
            return Err(PhymError::Config("one twist slot per axis required".into()));
        }
        for (a, t) in twist.iter().enumerate() {
            if let Some(t) = t {
                if !self.is_periodic(a) {
                    return Err(PhymError::Config(format!("axis {a} is not periodic and cannot carry a twist")));
                }
                if (*t * t.adjoint() - CMat::identity(t.rank())).norm() > 1e-12 {
                    return Err(PhymError::Config(format!("twist on axis {a} is not unitary")));
                }
            }
        }
        self.twist = Some(twist);
        Ok(self)
    }

    /// Complex dimension (for even-dimensional domains).
    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        match self.kind {
            DomainKind::Torus => true,
            DomainKind::Cylinder => axis != 0,
            DomainKind::Box => false,
        }
    }

    pub fn twist_on(&self, axis: usize) -> Option<&CMat> {
        self.twist.as_ref().and_then(|t| t[axis].as_ref())
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        for a in 0..self.dim {
            c[a] = idx / self.strides[a];
            idx %= self.strides[a];
        }
        c
    }

    #[inline]
    pub fn coord(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.points[axis]
    }

    pub fn index(&self, c: &[usize]) -> usize {
        c.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn position(&self, idx: usize) -> Vec<f64> {
        self.coords(idx).iter().zip(&self.h).map(|(&i, h)| i as f64 * h).collect()
    }

    /// Neighbour in direction `dir = ±1` along `axis`; `None` past a non-periodic end.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, dir: i32) -> Option<(usize, Wrap)> {
        let n = self.points[axis];
        let i = self.coord(idx, axis);
        let s = self.strides[axis];
        if dir > 0 {
            if i + 1 < n {
                Some((idx + s, Wrap::Plain))
            } else if self.is_periodic(axis) {
                Some((idx + s - n * s, Wrap::Fwd))
            } else {
                None
            }
        } else if i > 0 {
            Some((idx - s, Wrap::Plain))
        } else if self.is_periodic(axis) {
            Some((idx + (n - 1) * s, Wrap::Bwd))
        } else {
            None
        }
    }

    /// Fetches an endomorphism value transported across identified faces.
    #[inline]
    pub fn transport(&self, v: &CMat, axis: usize, wrap: Wrap) -> CMat {
        match (wrap, self.twist_on(axis)) {
            (Wrap::Plain, _) | (_, None) => *v,
            (Wrap::Fwd, Some(t)) => *t * *v * t.adjoint(),
            (Wrap::Bwd, Some(t)) => t.adjoint() * *v * *t,
        }
    }

    #[inline]
    pub fn fetch(&self, f: &[CMat], idx: usize, axis: usize, dir: i32) -> Option<CMat> {
        self.neighbor(idx, axis, dir).map(|(j, w)| self.transport(&f[j], axis, w))
    }

    /// True at points on a non-periodic end face.
    pub fn on_boundary(&self, idx: usize) -> bool {
        (0..self.dim).any(|a| {
            !self.is_periodic(a) && {
                let i = self.coord(idx, a);
                i == 0 || i + 1 == self.points[a]
            }
        })
    }

    /// Quadrature weight of the cell at `idx` (trapezoid along non-periodic axes).
    pub fn weight(&self, idx: usize) -> f64 {
        let mut w = 1.0;
        for a in 0..self.dim {
            w *= self.h[a];
            if !self.is_periodic(a) {
                let i = self.coord(idx, a);
                if i == 0 || i + 1 == self.points[a] {
                    w *= 0.5;
                }
            }
        }
        w
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Riemann sum with a fixed pairwise summation order.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.len);
        let v: Vec<f64> = f.iter().enumerate().map(|(i, x)| x * self.weight(i)).collect();
        pairwise_sum(&v)
    }

    /// Displacement `y − x` with the minimum-image rule on periodic axes.
    pub fn displacement(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|a| {
                let mut d = y[a] - x[a];
                if self.is_periodic(a) {
                    let l = self.lengths[a];
                    d -= l * (d / l).round();
                }
                d
            })
            .collect()
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.displacement(x, y).iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    /// Largest radius for which periodic balls do not wrap onto themselves.
    pub fn injectivity_radius(&self) -> f64 {
        (0..self.dim)
            .filter(|&a| self.is_periodic(a))
            .map(|a| 0.5 * self.lengths[a])
            .fold(f64::INFINITY, f64::min)
    }

    /// `χ(|· − x| / r)`: one on `B_r(x)`, zero outside `B_{2r}(x)`, quintic
    /// smoothstep in between.
    pub fn cutoff_chi(&self, x: &[f64], r: f64) -> Result<Vec<f64>> {
        if 2.0 * r > self.injectivity_radius() {
            return Err(PhymError::Config(format!(
                "cutoff radius {r} exceeds the injectivity bound {}",
                0.5 * self.injectivity_radius()
            )));
        }
        Ok((0..self.len).map(|i| chi(self.distance(x, &self.position(i)) / r)).collect())
    }

    /// `|· − x|^{2−2n}` with `n = dim/2`; the cell containing `x` gets the
    /// average of the kernel over the ball of equal volume.
    pub fn green_weight(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim as f64 / 2.0;
        let cell: f64 = self.h.iter().product();
        let rho_c = (cell / unit_ball_volume(self.dim)).powf(1.0 / self.dim as f64);
        let center = n * rho_c.powf(2.0 - 2.0 * n);
        (0..self.len)
            .map(|i| {
                let d = self.displacement(x, &self.position(i));
                let inside = d.iter().zip(&self.h).all(|(di, h)| di.abs() < 0.5 * h);
                if inside {
                    center
                } else {
                    d.iter().map(|v| v * v).sum::<f64>().sqrt().powf(2.0 - 2.0 * n)
                }
            })
            .collect()
    }
}

/// Quintic smoothstep cutoff profile: 1 on `[0,1]`, 0 on `[2,∞)`.
pub fn chi(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let u = t - 1.0;
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// Volume of the unit ball in ℝ^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Area of the unit sphere `S^{d−1}`.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        v.iter().sum()
    } else {
        let m = v.len() / 2;
        pairwise_sum(&v[..m]) + pairwise_sum(&v[m..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbors_wrap_on_torus() {
        let d = GridDomain::unit_torus(1, 8);
        let last = d.index(&[7, 3]);
        let (j, w) = d.neighbor(last, 0, 1).unwrap();
        assert_eq!(d.coords(j), vec![0, 3]);
        assert_eq!(w, Wrap::Fwd);
        let (k, w) = d.neighbor(d.index(&[2, 0]), 1, -1).unwrap();
        assert_eq!(d.coords(k), vec![2, 7]);
        assert_eq!(w, Wrap::Bwd);
    }

    #[test]
    fn integrate_one_is_volume() {
        let t = GridDomain::torus(1, &[1.0, 2.0], &[8, 12]).unwrap();
        assert!((t.integrate(&vec![1.0; t.len()]) - 2.0).abs() < 1e-14);
        let p = CylinderParams { length: 3.0, delta_v: 1.0, delta_e: 1.0, delta_h: 1.0 };
        let c = GridDomain::cylinder(1, p, &[1.0], &[13, 8]).unwrap();
        assert!((c.integrate(&vec![1.0; c.len()]) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn chi_profile() {
        assert_eq!(chi(0.3), 1.0);
        assert_eq!(chi(2.5), 0.0);
        assert!((chi(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn oversized_cutoff_rejected() {
        let d = GridDomain::unit_torus(1, 16);
        assert!(d.cutoff_chi(&[0.5, 0.5], 0.3).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-14);
    }
}
