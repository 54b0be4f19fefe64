//! Krylov solvers on Hermitian matrix fields, viewed as a real vector space
//! with the inner product `Σ Re tr(A B†)`.

use crate::error::{PhymError, Result};
use crate::fields::EndoField;
use crate::matcalc::CMat;
use std::collections::BTreeMap;

pub fn dot(a: &[CMat], b: &[CMat]) -> f64 {
    let v: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.dot(y)).collect();
    crate::geometry::pairwise_sum(&v)
}

pub fn norm(a: &[CMat]) -> f64 {
    dot(a, a).sqrt()
}

/// `y ← y + alpha·x`
pub fn axpy(alpha: f64, x: &[CMat], y: &mut [CMat]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += *xi * alpha;
    }
}

pub fn scaled(alpha: f64, x: &[CMat]) -> EndoField {
    x.iter().map(|v| *v * alpha).collect()
}

#[derive(Clone, Debug)]
pub struct LinearReport {
    pub x: EndoField,
    pub iterations: usize,
    /// `‖b − Ax‖ / ‖b‖` as tracked by the method.
    pub relative_residual: f64,
}

pub type Operator<'a> = dyn FnMut(&[CMat]) -> Result<EndoField> + 'a;
pub type Preconditioner<'a> = dyn Fn(&[CMat]) -> EndoField + 'a;

/// Right-preconditioned Krylov method for `A x = b`.
pub trait LinearSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, op: &mut Operator, pre: &Preconditioner, b: &[CMat], tol: f64, max_iter: usize) -> Result<LinearReport>;
}

/// Restarted GMRES with Givens rotations.
#[derive(Clone, Copy, Debug)]
pub struct Gmres {
    pub restart: usize,
}

impl Default for Gmres {
    fn default() -> Self {
        Gmres { restart: 40 }
    }
}

impl LinearSolver for Gmres {
    fn name(&self) -> &'static str {
        "gmres"
    }

    fn solve(&self, op: &mut Operator, pre: &Preconditioner, b: &[CMat], tol: f64, max_iter: usize) -> Result<LinearReport> {
        let zero = CMat::zeros(b.first().map_or(1, |m| m.rank()));
        let mut x = vec![zero; b.len()];
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok(LinearReport { x, iterations: 0, relative_residual: 0.0 });
        }
        let m = self.restart.max(1);
        let mut total = 0;
        let mut r = b.to_vec();
        let mut rel = 1.0;
        let mut last_cycle = f64::INFINITY;
        while total < max_iter {
            let beta = norm(&r);
            rel = beta / bnorm;
            // a full cycle that gains less than 10% means the operator noise floor was hit
            if rel <= tol || rel > 0.9 * last_cycle {
                break;
            }
            last_cycle = rel;
            let mut v: Vec<EndoField> = vec![scaled(1.0 / beta, &r)];
            let mut z: Vec<EndoField> = Vec::with_capacity(m);
            let mut hess = vec![vec![0.0; m]; m + 1];
            let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
            let mut g = vec![0.0; m + 1];
            g[0] = beta;
            let mut k = 0;
            while k < m && total < max_iter {
                let zk = pre(&v[k]);
                let mut w = op(&zk)?;
                z.push(zk);
                for (i, vi) in v.iter().enumerate() {
                    let hik = dot(&w, vi);
                    hess[i][k] = hik;
                    axpy(-hik, vi, &mut w);
                }
                let wn = norm(&w);
                hess[k + 1][k] = wn;
                for i in 0..k {
                    let t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
                    hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
                    hess[i][k] = t;
                }
                let den = hess[k][k].hypot(hess[k + 1][k]);
                if den == 0.0 {
                    k += 1;
                    total += 1;
                    break;
                }
                cs[k] = hess[k][k] / den;
                sn[k] = hess[k + 1][k] / den;
                hess[k][k] = den;
                hess[k + 1][k] = 0.0;
                g[k + 1] = -sn[k] * g[k];
                g[k] *= cs[k];
                k += 1;
                total += 1;
                rel = g[k].abs() / bnorm;
                if rel <= tol || wn == 0.0 {
                    break;
                }
                v.push(scaled(1.0 / wn, &w));
            }
            let mut y = vec![0.0; k];
            for i in (0..k).rev() {
                let acc: f64 = (i + 1..k).map(|j| hess[i][j] * y[j]).sum();
                y[i] = (g[i] - acc) / hess[i][i];
            }
            for (yi, zi) in y.iter().zip(&z) {
                axpy(*yi, zi, &mut x);
            }
            let ax = op(&x)?;
            r = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
            rel = norm(&r) / bnorm;
            if rel <= tol {
                break;
            }
        }
        Ok(LinearReport { x, iterations: total, relative_residual: rel })
    }
}

/// Right-preconditioned BiCGSTAB.
#[derive(Clone, Copy, Debug, Default)]
pub struct BiCgStab;

impl LinearSolver for BiCgStab {
    fn name(&self) -> &'static str {
        "bicgstab"
    }

    fn solve(&self, op: &mut Operator, pre: &Preconditioner, b: &[CMat], tol: f64, max_iter: usize) -> Result<LinearReport> {
        let zero = CMat::zeros(b.first().map_or(1, |m| m.rank()));
        let mut x = vec![zero; b.len()];
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok(LinearReport { x, iterations: 0, relative_residual: 0.0 });
        }
        let mut r = b.to_vec();
        let r0 = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![zero; b.len()];
        let mut p = vec![zero; b.len()];
        let mut rel = 1.0;
        for it in 1..=max_iter {
            let rho_new = dot(&r0, &r);
            if rho_new == 0.0 {
                return Err(PhymError::Numeric("BiCGSTAB breakdown (rho = 0)".into()));
            }
            let beta = rho_new / rho * alpha / omega;
            rho = rho_new;
            for i in 0..p.len() {
                p[i] = r[i] + (p[i] - v[i] * omega) * beta;
            }
            let ph = pre(&p);
            v = op(&ph)?;
            alpha = rho / dot(&r0, &v);
            let mut sres = r.clone();
            axpy(-alpha, &v, &mut sres);
            axpy(alpha, &ph, &mut x);
            rel = norm(&sres) / bnorm;
            if rel <= tol {
                return Ok(LinearReport { x, iterations: it, relative_residual: rel });
            }
            let sh = pre(&sres);
            let tv = op(&sh)?;
            let tt = dot(&tv, &tv);
            omega = if tt == 0.0 { 0.0 } else { dot(&tv, &sres) / tt };
            axpy(omega, &sh, &mut x);
            r = sres;
            axpy(-omega, &tv, &mut r);
            rel = norm(&r) / bnorm;
            if rel <= tol || omega == 0.0 {
                return Ok(LinearReport { x, iterations: it, relative_residual: rel });
            }
        }
        Ok(LinearReport { x, iterations: max_iter, relative_residual: rel })
    }
}

pub fn linear_solver_registry() -> BTreeMap<&'static str, Box<dyn LinearSolver>> {
    let mut m: BTreeMap<&'static str, Box<dyn LinearSolver>> = BTreeMap::new();
    for s in [Box::new(Gmres::default()) as Box<dyn LinearSolver>, Box::new(BiCgStab)] {
        m.insert(s.name(), s);
    }
    m
}
