//! Matrix calculus on Hermitian matrices: exponential, logarithm and the
//! functions Υ, Θ, υ, cosh of `ad_s = [s, ·]`.
//!
//! Every function of `ad_s` acts entrywise in the eigenbasis of `s`: entry
//! `(i, j)` of the transformed argument is multiplied by `f(λᵢ − λⱼ)`.

pub mod cmat;
mod eigh;

pub use cmat::{CMat, C64, MAX_RANK};
pub use eigh::eigh;

use crate::error::{PhymError, Result};

pub const EPS_HERM: f64 = 1e-10;
pub const EPS_RECON: f64 = 1e-10;

/// A Hermitian matrix, optionally flagged traceless.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermElem {
    pub entries: CMat,
    pub traceless: bool,
}

impl HermElem {
    /// Validates and symmetrizes.
    pub fn new(m: CMat) -> Result<Self> {
        check_hermitian(&m)?;
        Ok(HermElem { entries: m.herm_part(), traceless: false })
    }

    pub fn new_traceless(m: CMat) -> Result<Self> {
        check_hermitian(&m)?;
        if m.trace().norm() > EPS_HERM * m.norm().max(f64::MIN_POSITIVE) {
            return Err(PhymError::Validation(format!("trace {} is not zero", m.trace())));
        }
        Ok(HermElem { entries: m.herm_part(), traceless: true })
    }
}

/// A positive-definite Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PosHerm {
    pub entries: CMat,
}

impl PosHerm {
    pub fn new(m: CMat) -> Result<Self> {
        check_hermitian(&m)?;
        let (vals, _) = eigh(&m);
        if vals[0] <= 0.0 {
            return Err(PhymError::Domain(format!("least eigenvalue {} is not positive", vals[0])));
        }
        Ok(PosHerm { entries: m.herm_part() })
    }
}

fn check_hermitian(m: &CMat) -> Result<()> {
    if !m.is_hermitian(EPS_HERM) {
        return Err(PhymError::Validation(format!(
            "matrix is not Hermitian: |M - M^H| = {:.3e}",
            (*m - m.adjoint()).norm()
        )));
    }
    Ok(())
}

/// Spectral data of a Hermitian `s` needed to evaluate functions of `ad_s`.
#[derive(Clone, Copy, Debug)]
pub struct AdSpectrum {
    pub eigvals: [f64; MAX_RANK],
    pub eigvecs: CMat,
}

impl AdSpectrum {
    pub fn new(s: &CMat) -> Self {
        let (eigvals, eigvecs) = eigh(s);
        AdSpectrum { eigvals, eigvecs }
    }

    pub fn rank(&self) -> usize {
        self.eigvecs.rank()
    }

    /// `λᵢ − λⱼ`, row-major.
    pub fn pair_gaps(&self) -> Vec<f64> {
        let r = self.rank();
        let mut g = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                g.push(self.eigvals[i] - self.eigvals[j]);
            }
        }
        g
    }

    pub fn reconstruct(&self) -> CMat {
        self.func(|x| x)
    }

    /// `U f(Λ) U†`
    pub fn func(&self, f: impl Fn(f64) -> f64) -> CMat {
        let r = self.rank();
        let d: Vec<f64> = (0..r).map(|i| f(self.eigvals[i])).collect();
        self.eigvecs * CMat::from_diag(&d) * self.eigvecs.adjoint()
    }

    /// Table of `f(λᵢ − λⱼ)`.
    pub fn symbol(&self, f: impl Fn(f64) -> f64) -> Symbol {
        let r = self.rank();
        let mut t = [0.0; MAX_RANK * MAX_RANK];
        for i in 0..r {
            for j in 0..r {
                t[i * MAX_RANK + j] = f(self.eigvals[i] - self.eigvals[j]);
            }
        }
        Symbol { u: self.eigvecs, t }
    }

    pub fn apply(&self, f: impl Fn(f64) -> f64, x: &CMat) -> CMat {
        self.symbol(f).apply(x)
    }
}

/// A function of `ad_s` tabulated on the eigen-pairs of `s`.
#[derive(Clone, Copy, Debug)]
pub struct Symbol {
    u: CMat,
    t: [f64; MAX_RANK * MAX_RANK],
}

impl Symbol {
    pub fn apply(&self, x: &CMat) -> CMat {
        let mut y = self.u.adjoint() * *x * self.u;
        let r = y.rank();
        for i in 0..r {
            for j in 0..r {
                y[(i, j)] *= self.t[i * MAX_RANK + j];
            }
        }
        self.u * y * self.u.adjoint()
    }

    pub fn values(&self) -> Vec<f64> {
        let r = self.u.rank();
        (0..r * r).map(|k| self.t[(k / r) * MAX_RANK + k % r]).collect()
    }
}

/// `(e^z − 1)/z` with `φ(0) = 1`.
pub fn phi(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        z.exp_m1() / z
    }
}

/// `sinh(z/2)/(z/2)`
pub fn theta_symbol(z: f64) -> f64 {
    let h = 0.5 * z;
    if h.abs() < 1e-4 {
        1.0 + h * h / 6.0 * (1.0 + h * h / 20.0)
    } else {
        h.sinh() / h
    }
}

pub fn upsilon_sqrt_symbol(z: f64) -> f64 {
    phi(z).sqrt()
}

pub fn mat_exp(s: &HermElem) -> PosHerm {
    PosHerm { entries: exp_herm(&s.entries) }
}

pub fn mat_log(p: &PosHerm) -> Result<HermElem> {
    let sp = AdSpectrum::new(&p.entries);
    let r = sp.rank();
    if sp.eigvals[..r].iter().any(|&l| l <= 0.0) {
        return Err(PhymError::Domain(format!("eigenvalue {} is not positive", sp.eigvals[0])));
    }
    Ok(HermElem { entries: sp.func(f64::ln), traceless: false })
}

/// `e^s` for Hermitian `s` (input symmetrized, not validated).
pub fn exp_herm(s: &CMat) -> CMat {
    AdSpectrum::new(s).func(f64::exp)
}

pub fn log_posdef(p: &CMat) -> CMat {
    AdSpectrum::new(p).func(f64::ln)
}

pub fn upsilon_apply(s: &CMat, x: &CMat) -> CMat {
    AdSpectrum::new(s).apply(phi, x)
}

pub fn theta_apply(s: &CMat, x: &CMat) -> CMat {
    AdSpectrum::new(s).apply(theta_symbol, x)
}

pub fn upsilon_sqrt_apply(s: &CMat, x: &CMat) -> CMat {
    AdSpectrum::new(s).apply(upsilon_sqrt_symbol, x)
}

/// `cosh(ad_{s/2}) x`
pub fn cosh_half_apply(s: &CMat, x: &CMat) -> CMat {
    AdSpectrum::new(s).apply(|g| (0.5 * g).cosh(), x)
}

/// `Ad(e^{s/2}) x = e^{s/2} x e^{−s/2}`
pub fn ad_exp_conj(s: &CMat, x: &CMat) -> CMat {
    AdSpectrum::new(s).apply(|g| (0.5 * g).exp(), x)
}

/// `Ad(e^{s/2}) Υ(−s) x`, whose symbol is `sinh(g/2)/(g/2)`.
pub fn pairing_operator_apply(s: &CMat, x: &CMat) -> CMat {
    AdSpectrum::new(s).apply(theta_symbol, x)
}

/// Fréchet derivative `d_x exp(y) = (Υ(x) y) e^x`.
pub fn dexp(x: &CMat, y: &CMat) -> CMat {
    let sp = AdSpectrum::new(x);
    sp.apply(phi, y) * sp.func(f64::exp)
}
