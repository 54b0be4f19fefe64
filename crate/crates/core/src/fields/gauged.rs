//! Two independent evaluations of `𝔎(s) = Ad(e^{s/2}) K_{H₀e^s}`.

use super::{i_lambda_f, EndoField, Reference};
use crate::error::Result;
use crate::matcalc::{phi, theta_symbol, AdSpectrum, CMat};
use std::collections::BTreeMap;

pub trait GaugedCurvature: Send + Sync {
    fn name(&self) -> &'static str;
    /// `𝔎(s)` in the unitary frame of the reference, Hermitian traceless.
    fn eval(&self, reference: &Reference, s: &[CMat]) -> Result<EndoField>;
}

/// Curvature of the metric `H₀e^s` itself, then conjugated by `e^{s/2}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct DirectRoute;

impl GaugedCurvature for DirectRoute {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn eval(&self, reference: &Reference, s: &[CMat]) -> Result<EndoField> {
        let d = reference.domain();
        let (g, ginv) = reference.frame();
        let mut p = Vec::with_capacity(s.len());
        let mut half = Vec::with_capacity(s.len());
        for (i, si) in s.iter().enumerate() {
            let sp = AdSpectrum::new(si);
            p.push(g[i] * sp.func(f64::exp) * g[i]);
            half.push(sp);
        }
        let x = i_lambda_f(d, &p)?;
        Ok((0..s.len())
            .map(|i| {
                // g·iΛF·g⁻¹ is e^{s}-selfadjoint; Ad(e^{s/2}) makes it Hermitian.
                let xu = g[i] * x[i] * ginv[i];
                half[i].apply(|z| (0.5 * z).exp(), &xu).herm_part().traceless()
            })
            .collect())
    }
}

/// Explicit expansion
/// `𝔎 = cosh(ad_{s/2})K₀ + ½Θ(s)∇*∇s − Σ_k (∇_k̄Υ(−s/2))∇_k s
///      − Σ_k (∇_kΥ(s/2))∇_k̄ s − ½Σ_k [Υ(−s/2)∇_k s, Υ(s/2)∇_k̄ s]`,
/// where `(∇Υ)Y := ∇(ΥY) − Υ∇Y`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FormulaRoute;

impl GaugedCurvature for FormulaRoute {
    fn name(&self) -> &'static str {
        "formula"
    }

    fn eval(&self, reference: &Reference, s: &[CMat]) -> Result<EndoField> {
        let d = reference.domain();
        let len = s.len();
        let spec: Vec<AdSpectrum> = s.iter().map(AdSpectrum::new).collect();
        let ups_m: Vec<_> = spec.iter().map(|sp| sp.symbol(|g| phi(-0.5 * g))).collect();
        let ups_p: Vec<_> = spec.iter().map(|sp| sp.symbol(|g| phi(0.5 * g))).collect();
        let k0 = reference.k0();
        let lap = reference.rough_laplacian(s);
        let mut out: EndoField = (0..len)
            .map(|i| {
                spec[i].apply(|g| (0.5 * g).cosh(), &k0[i]) + spec[i].apply(theta_symbol, &lap[i]) * 0.5
            })
            .collect();
        for k in 0..d.n() {
            let ds = reference.nabla_complex(s, k, -1.0);
            let dbs = reference.nabla_complex(s, k, 1.0);
            let a: EndoField = (0..len).map(|i| ups_m[i].apply(&ds[i])).collect();
            let b: EndoField = (0..len).map(|i| ups_p[i].apply(&dbs[i])).collect();
            let dbar_a = reference.nabla_complex(&a, k, 1.0);
            let dbar_ds = reference.nabla_complex(&ds, k, 1.0);
            let d_b = reference.nabla_complex(&b, k, -1.0);
            let d_dbs = reference.nabla_complex(&dbs, k, -1.0);
            for i in 0..len {
                let t3 = dbar_a[i] - ups_m[i].apply(&dbar_ds[i]);
                let t4 = d_b[i] - ups_p[i].apply(&d_dbs[i]);
                let t5 = a[i].commutator(&b[i]) * 0.5;
                out[i] -= t3 + t4 + t5;
            }
        }
        Ok(out.into_iter().map(|m| m.herm_part().traceless()).collect())
    }
}

/// Named strategies for evaluating `𝔎`.
pub fn gauged_curvature_registry() -> BTreeMap<&'static str, Box<dyn GaugedCurvature>> {
    let mut m: BTreeMap<&'static str, Box<dyn GaugedCurvature>> = BTreeMap::new();
    for s in [Box::new(DirectRoute) as Box<dyn GaugedCurvature>, Box::new(FormulaRoute)] {
        m.insert(s.name(), s);
    }
    m
}
