use super::{mean_curvature, EndoField};
use crate::error::Result;
use crate::geometry::GridDomain;
use crate::matcalc::{AdSpectrum, CMat, C64};

/// Reference metric `H₀` with its unitary frame, connection and mean curvature.
///
/// In the frame `g = P₀^{1/2}` the Chern connection of `H₀` is
/// `A_k = g⁻¹∂_k g`, `A_k̄ = −A_k†`; on endomorphisms
/// `∇ₐX = ∂ₐX + [Aₐ, X]` with real components `Aₓ = A_k + A_k̄`,
/// `A_y = i(A_k − A_k̄)`.
#[derive(Clone, Debug)]
pub struct Reference {
    domain: GridDomain,
    rank: usize,
    p0: EndoField,
    g: EndoField,
    ginv: EndoField,
    k0: EndoField,
    conn: Vec<EndoField>,
    conn_div: Vec<EndoField>,
    flat: bool,
}

impl Reference {
    /// Flat identity reference.
    pub fn identity(domain: &GridDomain, rank: usize) -> Self {
        let id = vec![CMat::identity(rank); domain.len()];
        let z = vec![CMat::zeros(rank); domain.len()];
        Reference {
            domain: domain.clone(),
            rank,
            p0: id.clone(),
            g: id.clone(),
            ginv: id,
            k0: z.clone(),
            conn: vec![z.clone(); domain.dim],
            conn_div: vec![z; domain.dim],
            flat: true,
        }
    }

    /// Reference built from a holomorphic-frame metric `P₀`.
    pub fn new(domain: &GridDomain, p0: EndoField) -> Result<Self> {
        let rank = p0[0].rank();
        let k_hol = mean_curvature(domain, &p0)?;
        let mut g = Vec::with_capacity(p0.len());
        let mut ginv = Vec::with_capacity(p0.len());
        for p in &p0 {
            let sp = AdSpectrum::new(p);
            g.push(sp.func(f64::sqrt));
            ginv.push(sp.func(|l| 1.0 / l.sqrt()));
        }
        let k0 = (0..domain.len()).map(|i| (g[i] * k_hol[i] * ginv[i]).herm_part().traceless()).collect();
        let n = domain.n();
        let mut conn = vec![Vec::new(); domain.dim];
        for k in 0..n {
            let dg = domain.complex_deriv_endo(&g, k, -1.0);
            let ak: EndoField = dg.iter().zip(&ginv).map(|(d, gi)| *gi * *d).collect();
            let i_unit = C64::new(0.0, 1.0);
            conn[2 * k] = ak.iter().map(|a| *a - a.adjoint()).collect();
            conn[2 * k + 1] = ak.iter().map(|a| (*a + a.adjoint()).scale_c(i_unit)).collect();
        }
        let conn_div = (0..domain.dim).map(|a| domain.deriv(&conn[a], a)).collect();
        Ok(Reference { domain: domain.clone(), rank, p0, g, ginv, k0, conn, conn_div, flat: false })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn p0(&self) -> &[CMat] {
        &self.p0
    }

    pub fn frame(&self) -> (&[CMat], &[CMat]) {
        (&self.g, &self.ginv)
    }

    /// `K_{H₀}` in the unitary frame.
    pub fn k0(&self) -> &[CMat] {
        &self.k0
    }

    /// Real components `Aₐ` of the reference connection (empty when flat).
    pub fn connection(&self) -> &[EndoField] {
        &self.conn
    }

    pub fn is_flat_identity(&self) -> bool {
        self.flat
    }

    /// Holomorphic-frame metric `P = g e^s g`.
    pub fn metric(&self, s: &[CMat]) -> EndoField {
        s.iter()
            .zip(self.g.iter())
            .map(|(si, gi)| *gi * AdSpectrum::new(si).func(f64::exp) * *gi)
            .collect()
    }

    /// Unitary-frame state `s = log(g⁻¹ P g⁻¹)` of a holomorphic-frame metric.
    pub fn state_of(&self, p: &[CMat]) -> EndoField {
        p.iter()
            .zip(self.ginv.iter())
            .map(|(pi, gi)| AdSpectrum::new(&(*gi * *pi * *gi)).func(f64::ln))
            .collect()
    }

    /// Holomorphic-frame endomorphism to unitary frame: `g X g⁻¹`.
    pub fn to_unitary(&self, x: &[CMat]) -> EndoField {
        (0..x.len()).map(|i| self.g[i] * x[i] * self.ginv[i]).collect()
    }

    /// `∇ₐX` along real axis `a`.
    pub fn nabla(&self, x: &[CMat], axis: usize) -> EndoField {
        let dx = self.domain.deriv(x, axis);
        if self.flat {
            return dx;
        }
        let a = &self.conn[axis];
        (0..x.len()).map(|i| dx[i] + a[i].commutator(&x[i])).collect()
    }

    /// `∇_k` (sign −1) or `∇_k̄` (sign +1).
    pub fn nabla_complex(&self, x: &[CMat], k: usize, sign: f64) -> EndoField {
        let i_unit = C64::new(0.0, sign);
        let ax = self.nabla(x, 2 * k);
        let ay = self.nabla(x, 2 * k + 1);
        ax.iter().zip(&ay).map(|(p, q)| (*p + q.scale_c(i_unit)) * 0.5).collect()
    }

    /// Rough Laplacian
    /// `∇*∇X = −Σₐ(∂ₐ²X + [∂ₐAₐ, X] + 2[Aₐ, ∂ₐX] + [Aₐ, [Aₐ, X]])`
    /// with the compact second difference.
    pub fn rough_laplacian(&self, x: &[CMat]) -> EndoField {
        if self.flat {
            return self.domain.laplacian(x);
        }
        rough_laplacian_with(&self.domain, &self.conn, &self.conn_div, x)
    }
}

/// `∇*∇X` for the connection with real components `conn[a]` and their
/// derivatives `conn_div[a] = ∂ₐ conn[a]`.
pub fn rough_laplacian_with(d: &GridDomain, conn: &[EndoField], conn_div: &[EndoField], x: &[CMat]) -> EndoField {
    let mut out = d.laplacian(x);
    for a in 0..d.dim {
        let dx = d.deriv(x, a);
        let (c, dc) = (&conn[a], &conn_div[a]);
        for i in 0..x.len() {
            let t = dc[i].commutator(&x[i]) + c[i].commutator(&dx[i]) * 2.0 + c[i].commutator(&c[i].commutator(&x[i]));
            out[i] -= t;
        }
    }
    out
}
