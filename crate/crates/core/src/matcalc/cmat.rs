//! Small dense complex matrices stored inline (rank at most [`MAX_RANK`]).
//!
//! Lattice fields hold one of these per site, so the type is `Copy` and never
//! touches the heap.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

pub type C64 = Complex64;

pub const MAX_RANK: usize = 4;
const CAP: usize = MAX_RANK * MAX_RANK;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat {
    r: usize,
    data: [C64; CAP],
}

impl CMat {
    pub fn zeros(r: usize) -> Self {
        assert!(r >= 1 && r <= MAX_RANK, "rank {r} out of range 1..={MAX_RANK}");
        CMat { r, data: [ZERO; CAP] }
    }

    pub fn identity(r: usize) -> Self {
        let mut m = Self::zeros(r);
        for i in 0..r {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(r: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(r);
        for i in 0..r {
            for j in 0..r {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Row-major constructor.
    pub fn from_rows(r: usize, rows: &[C64]) -> Self {
        assert_eq!(rows.len(), r * r);
        Self::from_fn(r, |i, j| rows[i * r + j])
    }

    /// Matrix unit E_ij.
    pub fn unit(r: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(r);
        m[(i, j)] = ONE;
        m
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.r, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.r, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.r).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|z| z * a)
    }

    pub fn scale_c(&self, a: C64) -> Self {
        self.map(|z| z * a)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut m = *self;
        for z in m.data[..self.r * MAX_RANK].iter_mut() {
            *z = f(*z);
        }
        m
    }

    /// (M + M†)/2
    pub fn herm_part(&self) -> Self {
        (*self + self.adjoint()).scale(0.5)
    }

    /// Removes the trace: M − (tr M / r)·id.
    pub fn traceless(&self) -> Self {
        let t = self.trace() / self.r as f64;
        let mut m = *self;
        for i in 0..self.r {
            m[(i, i)] -= t;
        }
        m
    }

    pub fn commutator(&self, b: &Self) -> Self {
        *self * *b - *b * *self
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.r {
            for j in 0..self.r {
                acc += self[(i, j)].norm_sqr();
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        let mut acc: f64 = 0.0;
        for i in 0..self.r {
            for j in 0..self.r {
                acc = acc.max(self[(i, j)].norm());
            }
        }
        acc
    }

    /// Real Frobenius pairing Re tr(A B†).
    pub fn dot(&self, b: &Self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.r {
            for j in 0..self.r {
                let (x, y) = (self[(i, j)], b[(i, j)]);
                acc += x.re * y.re + x.im * y.im;
            }
        }
        acc
    }

    /// Hermitian Frobenius pairing tr(A B†).
    pub fn inner(&self, b: &Self) -> C64 {
        let mut acc = ZERO;
        for i in 0..self.r {
            for j in 0..self.r {
                acc += self[(i, j)] * b[(i, j)].conj();
            }
        }
        acc
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).norm() <= tol * self.norm().max(f64::MIN_POSITIVE)
    }

    /// Inverse by Gaussian elimination with partial pivoting. `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let r = self.r;
        let mut a = *self;
        let mut inv = Self::identity(r);
        let scale = self.max_abs();
        if scale == 0.0 {
            return None;
        }
        for c in 0..r {
            let mut p = c;
            for k in c + 1..r {
                if a[(k, c)].norm() > a[(p, c)].norm() {
                    p = k;
                }
            }
            if a[(p, c)].norm() <= 1e-300_f64.max(scale * 1e-15) {
                return None;
            }
            if p != c {
                for j in 0..r {
                    a.data.swap(p * MAX_RANK + j, c * MAX_RANK + j);
                    inv.data.swap(p * MAX_RANK + j, c * MAX_RANK + j);
                }
            }
            let d = ONE / a[(c, c)];
            for j in 0..r {
                a[(c, j)] *= d;
                inv[(c, j)] *= d;
            }
            for k in 0..r {
                if k != c {
                    let f = a[(k, c)];
                    if f != ZERO {
                        for j in 0..r {
                            let (acj, icj) = (a[(c, j)], inv[(c, j)]);
                            a[(k, j)] -= f * acj;
                            inv[(k, j)] -= f * icj;
                        }
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn to_vec(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.r * self.r);
        for i in 0..self.r {
            for j in 0..self.r {
                v.push(self[(i, j)]);
            }
        }
        v
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * MAX_RANK + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * MAX_RANK + j]
    }
}

impl Add for CMat {
    type Output = CMat;
    #[inline]
    fn add(mut self, b: CMat) -> CMat {
        self += b;
        self
    }
}

impl AddAssign for CMat {
    #[inline]
    fn add_assign(&mut self, b: CMat) {
        debug_assert_eq!(self.r, b.r);
        for k in 0..CAP {
            self.data[k] += b.data[k];
        }
    }
}

impl Sub for CMat {
    type Output = CMat;
    #[inline]
    fn sub(mut self, b: CMat) -> CMat {
        self -= b;
        self
    }
}

impl SubAssign for CMat {
    #[inline]
    fn sub_assign(&mut self, b: CMat) {
        debug_assert_eq!(self.r, b.r);
        for k in 0..CAP {
            self.data[k] -= b.data[k];
        }
    }
}

impl Neg for CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.map(|z| -z)
    }
}

impl Mul for CMat {
    type Output = CMat;
    #[inline]
    fn mul(self, b: CMat) -> CMat {
        debug_assert_eq!(self.r, b.r);
        let r = self.r;
        let mut out = CMat { r, data: [ZERO; CAP] };
        for i in 0..r {
            for k in 0..r {
                let a = self.data[i * MAX_RANK + k];
                for j in 0..r {
                    out.data[i * MAX_RANK + j] += a * b.data[k * MAX_RANK + j];
                }
            }
        }
        out
    }
}

impl Mul<f64> for CMat {
    type Output = CMat;
    fn mul(self, a: f64) -> CMat {
        self.scale(a)
    }
}

impl MulAssign<f64> for CMat {
    fn mul_assign(&mut self, a: f64) {
        for z in self.data.iter_mut() {
            *z *= a;
        }
    }
}
