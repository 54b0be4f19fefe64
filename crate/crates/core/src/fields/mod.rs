//! Endomorphism-valued lattice fields: Chern curvature, mean curvature and the
//! gauged mean curvature `𝔎(s) = Ad(e^{s/2}) K_{H₀e^s}`.
//!
//! Metrics are stored as Hermitian matrices `P` in a holomorphic frame. A
//! reference metric `P₀` fixes the unitary frame `g = P₀^{1/2}`; the state `s`
//! is kept Hermitian traceless in that frame, and the metric it describes is
//! `P = g e^s g`.

mod gauged;
mod modes;
mod reference;

pub use gauged::{gauged_curvature_registry, DirectRoute, FormulaRoute, GaugedCurvature};
pub use modes::{heisenberg_pair, TwistBasis, TwistMode};
pub use reference::{rough_laplacian_with, Reference};

use crate::error::{PhymError, Result};
use crate::geometry::{FormField11, GridDomain};
use crate::matcalc::{CMat, C64};

/// A lattice field of matrices.
pub type EndoField = Vec<CMat>;

/// Curvature data of a metric.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    /// `F_{jk̄}` by central differences.
    pub form: FormField11<CMat>,
    /// Mean curvature `K_H`, trace-free, H-selfadjoint.
    pub k: EndoField,
    /// Trace-free part of the curvature form.
    pub f0: FormField11<CMat>,
}

fn singular(idx: usize, d: &GridDomain) -> PhymError {
    PhymError::Domain(format!("metric is singular at lattice point {:?}", d.coords(idx)))
}

fn inverse_field(d: &GridDomain, p: &[CMat]) -> Result<EndoField> {
    p.iter().enumerate().map(|(i, m)| m.inverse().ok_or_else(|| singular(i, d))).collect()
}

/// Forward link values `Q_{i+½} = M⁻¹(P_{i+1} − P_i)/h`, `M = ½(P_i + P_{i+1})`,
/// along `axis`; `None` where the forward neighbour does not exist.
fn links(d: &GridDomain, p: &[CMat], axis: usize) -> Result<Vec<Option<CMat>>> {
    let h = d.h[axis];
    (0..d.len())
        .map(|i| match d.fetch(p, i, axis, 1) {
            Some(pn) => {
                let m = (p[i] + pn) * 0.5;
                let mi = m.inverse().ok_or_else(|| singular(i, d))?;
                Ok(Some(mi * (pn - p[i]) * (1.0 / h)))
            }
            None => Ok(None),
        })
        .collect()
}

/// `iΛF_H` in the holomorphic frame (not projected).
///
/// With `Qₐ = P⁻¹∂ₐP` one has `iΛF = −½ Σ_k (∂ₓQₓ + ∂_yQ_y + i[Qₓ, Q_y])`.
/// The divergence terms use half-point links so the principal part is the
/// compact Laplacian; the commutator uses nodal central differences.
pub fn i_lambda_f(d: &GridDomain, p: &[CMat]) -> Result<EndoField> {
    let pinv = inverse_field(d, p)?;
    let r = p[0].rank();
    let mut out = vec![CMat::zeros(r); d.len()];
    let mut nodal: Vec<EndoField> = Vec::with_capacity(d.dim);
    for a in 0..d.dim {
        let dp = d.deriv(p, a);
        nodal.push(dp.iter().zip(&pinv).map(|(x, pi)| *pi * *x).collect());
    }
    for a in 0..d.dim {
        let l = links(d, p, a)?;
        let h = d.h[a];
        for i in 0..d.len() {
            let back = d.neighbor(i, a, -1).map(|(j, w)| (l[j], w));
            let div = match (l[i], back) {
                (Some(fwd), Some((Some(bk), w))) => (fwd - d.transport(&bk, a, w)) * (1.0 / h),
                _ => d.deriv_at(&nodal[a], i, a),
            };
            out[i] -= div * 0.5;
        }
    }
    let i_unit = C64::new(0.0, 1.0);
    for k in 0..d.n() {
        let (qx, qy) = (&nodal[2 * k], &nodal[2 * k + 1]);
        for i in 0..d.len() {
            out[i] -= qx[i].commutator(&qy[i]).scale_c(i_unit) * 0.5;
        }
    }
    Ok(out)
}

/// H-selfadjoint trace-free projection `½(X + P⁻¹X†P) − tr/r`.
pub fn project_h(x: &CMat, p: &CMat, pinv: &CMat) -> CMat {
    ((*x + *pinv * x.adjoint() * *p) * 0.5).traceless()
}

/// `K_H = iΛF_H − (tr iΛF_H / r)·id` in the holomorphic frame.
pub fn mean_curvature(d: &GridDomain, p: &[CMat]) -> Result<EndoField> {
    let x = i_lambda_f(d, p)?;
    let pinv = inverse_field(d, p)?;
    Ok((0..d.len()).map(|i| project_h(&x[i], &p[i], &pinv[i])).collect())
}

/// Curvature form `F_{jk̄} = −∂̄_k(P⁻¹∂_j P)` by central differences, with the
/// mean curvature from [`mean_curvature`].
pub fn chern_curvature(d: &GridDomain, p: &[CMat]) -> Result<CurvatureField> {
    let n = d.n();
    let pinv = inverse_field(d, p)?;
    let mut comps = Vec::with_capacity(n * n);
    let mut theta = Vec::with_capacity(n);
    for j in 0..n {
        let dj = d.complex_deriv_endo(p, j, -1.0);
        theta.push(dj.iter().zip(&pinv).map(|(x, pi)| *pi * *x).collect::<EndoField>());
    }
    for j in 0..n {
        for k in 0..n {
            let v = d.complex_deriv_endo(&theta[j], k, 1.0);
            comps.push(v.into_iter().map(|m| -m).collect::<EndoField>());
        }
    }
    let form = FormField11 { n, comps };
    let f0 = FormField11 {
        n,
        comps: form.comps.iter().map(|c| c.iter().map(|m| m.traceless()).collect()).collect(),
    };
    Ok(CurvatureField { form, k: mean_curvature(d, p)?, f0 })
}

/// `|X|²_H = tr(X P⁻¹ X† P)`: the pointwise norm induced by `H`.
pub fn h_norm_sqr(x: &CMat, p: &CMat, pinv: &CMat) -> f64 {
    (*x * *pinv * x.adjoint() * *p).trace().re
}

/// Energy densities of a metric on a surface of complex dimension 2:
/// `(|F°|², |K|², q₄)` where `q₄ = tr(F°∧F°)/(4π²)` is expressed as a multiple
/// of the volume form.
///
/// Here `|F°|² = 4 Σ_{jk} |F°_{jk̄}|²_H` (each `|dz_j ∧ dz̄_k|² = 4`) and `K` is
/// `2 Σ_k F°_{kk̄}` from the same difference scheme.
pub fn topological_energy_density(d: &GridDomain, p: &[CMat]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if d.n() != 2 {
        return Err(PhymError::Unsupported(format!(
            "topological energy density needs complex dimension 2, got {}",
            d.n()
        )));
    }
    let curv = chern_curvature(d, p)?;
    let pinv = inverse_field(d, p)?;
    // enforce F_{jk̄}^{*H} = F_{kj̄} exactly so the algebraic identity is pointwise
    let adj = |x: &CMat, i: usize| pinv[i] * x.adjoint() * p[i];
    let f = |j: usize, k: usize, i: usize| (curv.f0.get(j, k)[i] + adj(&curv.f0.get(k, j)[i], i)) * 0.5;
    let mut fsq = Vec::with_capacity(d.len());
    let mut ksq = Vec::with_capacity(d.len());
    let mut q4 = Vec::with_capacity(d.len());
    let pi2 = std::f64::consts::PI.powi(2);
    for i in 0..d.len() {
        let mut acc = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                acc += h_norm_sqr(&f(j, k, i), &p[i], &pinv[i]);
            }
        }
        fsq.push(4.0 * acc);
        let kk = (f(0, 0, i) + f(1, 1, i)) * 2.0;
        ksq.push(h_norm_sqr(&kk, &p[i], &pinv[i]));
        let t = (f(0, 0, i) * f(1, 1, i) - f(0, 1, i) * f(1, 0, i)).trace();
        q4.push(-2.0 / pi2 * t.re);
    }
    Ok((fsq, ksq, q4))
}

/// Pointwise Frobenius inner product of two fields.
pub fn pointwise_dot(a: &[CMat], b: &[CMat]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).collect()
}

pub fn pointwise_norm_sqr(a: &[CMat]) -> Vec<f64> {
    a.iter().map(|x| x.norm_sqr()).collect()
}

pub fn sup_norm(a: &[CMat]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `∫⟨a, b⟩`
pub fn l2_dot(d: &GridDomain, a: &[CMat], b: &[CMat]) -> f64 {
    d.integrate(&pointwise_dot(a, b))
}

/// Residual field of the Laplacian identity
/// `⟨iΛ∂̄(e^{−s}∂e^s), s⟩ = ¼Δ|s|² + |υ(−s)∂s|²`,
/// where `∂s` is the (1,0)-part of the covariant derivative, normed with
/// `|dz|² = 2`. The left side is `⟨𝔎(s) − K₀, s⟩`.
pub fn laplacian_identity_field(reference: &Reference, s: &[CMat]) -> Result<Vec<f64>> {
    let d = reference.domain();
    let kk = DirectRoute.eval(reference, s)?;
    let sq = pointwise_norm_sqr(s);
    let lap = d.laplacian(&sq);
    let mut grad_term = vec![0.0; d.len()];
    for k in 0..d.n() {
        let dk = reference.nabla_complex(s, k, -1.0);
        for i in 0..d.len() {
            let y = crate::matcalc::AdSpectrum::new(&s[i]).apply(|g| crate::matcalc::phi(-g), &dk[i]);
            grad_term[i] += 2.0 * y.inner(&dk[i]).re;
        }
    }
    Ok((0..d.len())
        .map(|i| (kk[i] - reference.k0()[i]).dot(&s[i]) - 0.25 * lap[i] - grad_term[i])
        .collect())
}

/// `sup |⟨iΛ∂̄(e^{−s}∂e^s), s⟩ − ¼Δ|s|² − |υ(−s)∂s|²|` over lattice points away
/// from non-periodic ends.
pub fn laplacian_identity_residual(reference: &Reference, s: &[CMat]) -> Result<f64> {
    let d = reference.domain();
    let f = laplacian_identity_field(reference, s)?;
    Ok((0..d.len()).filter(|&i| !d.on_boundary(i)).map(|i| f[i].abs()).fold(0.0, f64::max))
}
