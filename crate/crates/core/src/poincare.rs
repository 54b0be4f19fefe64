//! Discretization estimates for Neumann–Poincaré constants: good coverings,
//! the weighted covering graph, local and discrete constants and the
//! combined bound `Q₁Λc(2 + Q₁²Q₂Λd)`, plus the radial blow-up surrogate.

use crate::analysis::ball;
use crate::error::{PhymError, Result};
use crate::geometry::{DomainKind, GridDomain};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use std::collections::{HashMap, HashSet, VecDeque};

/// A lattice domain with a volume density; masses are quadrature weights
/// times the density, edge conductances use the mean density of the ends.
#[derive(Clone, Debug)]
pub struct WeightedLattice {
    pub domain: GridDomain,
    pub density: Vec<f64>,
}

impl WeightedLattice {
    pub fn flat(domain: &GridDomain) -> Self {
        WeightedLattice { domain: domain.clone(), density: vec![1.0; domain.len()] }
    }

    pub fn with_density(domain: &GridDomain, density: Vec<f64>) -> Result<Self> {
        if density.len() != domain.len() || density.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(PhymError::Validation("density must be positive and finite at every site".into()));
        }
        Ok(WeightedLattice { domain: domain.clone(), density })
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.domain.weight(i) * self.density[i]
    }

    pub fn volume(&self, sites: &[usize]) -> f64 {
        sites.iter().map(|&i| self.mass(i)).sum()
    }

    /// Edges `(i, j, c)` of the lattice restricted to `sites`.
    fn edges(&self, sites: &[usize]) -> Vec<(usize, usize, f64)> {
        let d = &self.domain;
        let inside: HashSet<usize> = sites.iter().copied().collect();
        let cell: f64 = d.h.iter().product();
        let mut out = Vec::new();
        for &i in sites {
            for a in 0..d.dim {
                let Some((j, _)) = d.neighbor(i, a, 1) else { continue };
                if j == i || !inside.contains(&j) {
                    continue;
                }
                // trapezoid faces on the other non-periodic axes
                let mut face = 1.0;
                for b in (0..d.dim).filter(|&b| b != a && !d.is_periodic(b)) {
                    let c = d.coord(i, b);
                    if c == 0 || c + 1 == d.points[b] {
                        face *= 0.5;
                    }
                }
                let c = face * cell / (d.h[a] * d.h[a]) * 0.5 * (self.density[i] + self.density[j]);
                out.push((i, j, c));
            }
        }
        out
    }
}

/// `1/μ₂` for the weighted Neumann Laplacian on `sites`; infinite when the
/// induced graph is disconnected.
pub fn neumann_constant(lattice: &WeightedLattice, sites: &[usize]) -> f64 {
    let n = sites.len();
    if n < 2 {
        return 0.0;
    }
    let slot: HashMap<usize, usize> = sites.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let edges: Vec<(usize, usize, f64)> = lattice.edges(sites).into_iter().map(|(i, j, c)| (slot[&i], slot[&j], c)).collect();
    let masses: Vec<f64> = sites.iter().map(|&s| lattice.mass(s)).collect();
    pencil_constant(&masses, &edges)
}

/// `1/μ₂` of `L f = μ M f` for a weighted graph, or `∞` when disconnected.
fn pencil_constant(masses: &[f64], edges: &[(usize, usize, f64)]) -> f64 {
    let n = masses.len();
    if n < 2 {
        return 0.0;
    }
    if !connected(n, edges) {
        return f64::INFINITY;
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(i, j, c) in edges {
        l[(i, i)] += c;
        l[(j, j)] += c;
        l[(i, j)] -= c;
        l[(j, i)] -= c;
    }
    let inv_sqrt: Vec<f64> = masses.iter().map(|m| 1.0 / m.sqrt()).collect();
    let sym = DMatrix::from_fn(n, n, |i, j| l[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    1.0 / eig[1]
}

fn connected(n: usize, edges: &[(usize, usize, f64)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(i, j, c) in edges {
        if c > 0.0 {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[derive(Clone, Debug, Serialize)]
pub struct Triple {
    /// `None` for the end collar of a cylinder.
    pub center: Option<usize>,
    pub a: Vec<usize>,
    pub a_star: Vec<usize>,
    pub a_sharp: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodCovering {
    pub sigma: f64,
    pub triples: Vec<Triple>,
    /// `max_i |{j : A_i^# ∩ A_j^# ≠ ∅}|`
    pub q1: usize,
    /// `max vol(A_k*) / min(vol A_i, vol A_j)` over touching pairs.
    pub q2: f64,
    /// Touching pairs `(i, j)` with `i < j` and their witness `k`.
    pub witnesses: Vec<(usize, usize, usize)>,
    pub volumes: Vec<f64>,
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    // both sorted
    let mut j = 0;
    for &s in small {
        while j < big.len() && big[j] < s {
            j += 1;
        }
        if j == big.len() || big[j] != s {
            return false;
        }
    }
    true
}

/// Greedy maximal σ-separated centres in lattice order, balls of radii
/// `σ, 4σ, 8σ` clipped to the domain, and for cylinders the end collar
/// `A₀ = {ℓ > L − 1/2}`, `A₀* = A₀# = {ℓ > L − 1}`.
pub fn build_covering(lattice: &WeightedLattice, sigma: f64) -> Result<GoodCovering> {
    let d = &lattice.domain;
    let hmax = d.h.iter().cloned().fold(0.0, f64::max);
    if sigma < 2.0 * hmax * (1.0 - 1e-12) {
        return Err(PhymError::Resolution(format!("σ = {sigma} is below twice the lattice spacing {hmax}")));
    }
    let collar = d.kind == DomainKind::Cylinder;
    let length = d.lengths[0];
    if collar && length < 1.0 {
        return Err(PhymError::Domain("cylinder covering needs length at least 1".into()));
    }
    let ell = |i: usize| d.position(i)[0];
    let mut triples = Vec::new();
    if collar {
        let a: Vec<usize> = (0..d.len()).filter(|&i| ell(i) > length - 0.5).collect();
        let star: Vec<usize> = (0..d.len()).filter(|&i| ell(i) > length - 1.0).collect();
        triples.push(Triple { center: None, a, a_star: star.clone(), a_sharp: star });
    }
    let pos: Vec<Vec<f64>> = (0..d.len()).map(|i| d.position(i)).collect();
    let mut centers: Vec<usize> = Vec::new();
    for i in 0..d.len() {
        if collar && ell(i) > length - 0.5 {
            continue;
        }
        if centers.iter().all(|&c| d.distance(&pos[c], &pos[i]) >= sigma * (1.0 - 1e-12)) {
            centers.push(i);
        }
    }
    for &c in &centers {
        triples.push(Triple {
            center: Some(c),
            a: ball(d, c, sigma),
            a_star: ball(d, c, 4.0 * sigma),
            a_sharp: ball(d, c, 8.0 * sigma),
        });
    }
    for t in &mut triples {
        t.a = sorted(std::mem::take(&mut t.a));
        t.a_star = sorted(std::mem::take(&mut t.a_star));
        t.a_sharp = sorted(std::mem::take(&mut t.a_sharp));
    }
    let nt = triples.len();
    let volumes: Vec<f64> = triples.iter().map(|t| lattice.volume(&t.a)).collect();

    // nesting and covering
    for (i, t) in triples.iter().enumerate() {
        if !is_subset(&t.a, &t.a_star) || !is_subset(&t.a_star, &t.a_sharp) {
            return Err(PhymError::Validation(format!("triple {i} is not nested")));
        }
    }
    let mut covered = vec![false; d.len()];
    for t in &triples {
        for &s in &t.a {
            covered[s] = true;
        }
    }
    if let Some(miss) = covered.iter().position(|c| !c) {
        return Err(PhymError::Validation(format!("site {miss} is not covered")));
    }

    // overlap count of the A# sets
    let mut sharp_owners = vec![Vec::new(); d.len()];
    for (i, t) in triples.iter().enumerate() {
        for &s in &t.a_sharp {
            sharp_owners[s].push(i);
        }
    }
    let mut q1 = 0;
    for t in &triples {
        let mut met = HashSet::new();
        for &s in &t.a_sharp {
            met.extend(sharp_owners[s].iter().copied());
        }
        q1 = q1.max(met.len());
    }

    // touching pairs: a shared site or a lattice edge between the A sets
    let mut owners = vec![Vec::new(); d.len()];
    for (i, t) in triples.iter().enumerate() {
        for &s in &t.a {
            owners[s].push(i);
        }
    }
    let mut touching = HashSet::new();
    for s in 0..d.len() {
        let mut near: Vec<usize> = owners[s].clone();
        for a in 0..d.dim {
            for dir in [-1, 1] {
                if let Some((j, _)) = d.neighbor(s, a, dir) {
                    near.extend(owners[j].iter().copied());
                }
            }
        }
        for &i in &owners[s] {
            for &j in &near {
                if i != j {
                    touching.insert((i.min(j), i.max(j)));
                }
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = touching.into_iter().collect();
    pairs.sort_unstable();

    let mut witnesses = Vec::with_capacity(pairs.len());
    let mut q2: f64 = 0.0;
    for &(i, j) in &pairs {
        let k = witness(d, &triples, &pos, i, j);
        let union = sorted(triples[i].a.iter().chain(&triples[j].a).copied().collect());
        if !is_subset(&union, &triples[k].a_star) {
            return Err(PhymError::Validation(format!("no witness contains A_{i} ∪ A_{j}")));
        }
        q2 = q2.max(lattice.volume(&triples[k].a_star) / volumes[i].min(volumes[j]));
        witnesses.push((i, j, k));
    }
    if nt == 1 {
        q2 = q2.max(1.0);
    }
    Ok(GoodCovering { sigma, triples, q1, q2, witnesses, volumes })
}

/// The collar when either set is the collar, otherwise the centre that
/// minimises the larger distance to both centres (lowest index on ties).
fn witness(d: &GridDomain, triples: &[Triple], pos: &[Vec<f64>], i: usize, j: usize) -> usize {
    let (Some(ci), Some(cj)) = (triples[i].center, triples[j].center) else {
        return if triples[i].center.is_none() { i } else { j };
    };
    let mut best = (f64::INFINITY, usize::MAX);
    for (k, t) in triples.iter().enumerate() {
        if let Some(ck) = t.center {
            let m = d.distance(&pos[ck], &pos[ci]).max(d.distance(&pos[ck], &pos[cj]));
            if m < best.0 - 1e-12 {
                best = (m, k);
            }
        }
    }
    best.1
}

/// Vertex masses `m(i) = vol(A_i)`, edge masses `max{m(i), m(j)}` on
/// touching pairs.
#[derive(Clone, Debug, Serialize)]
pub struct WeightedGraph {
    pub masses: Vec<f64>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(masses: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if masses.iter().any(|m| !(*m > 0.0)) {
            return Err(PhymError::Validation("vertex masses must be positive".into()));
        }
        if edges.iter().any(|&(i, j, w)| i >= masses.len() || j >= masses.len() || i == j || w < 0.0) {
            return Err(PhymError::Validation("invalid edge".into()));
        }
        Ok(WeightedGraph { masses, edges })
    }

    pub fn from_covering(c: &GoodCovering) -> Self {
        let edges = c.witnesses.iter().map(|&(i, j, _)| (i, j, c.volumes[i].max(c.volumes[j]))).collect();
        WeightedGraph { masses: c.volumes.clone(), edges }
    }

    /// `𝓔(f,f) = ½ Σ_{(i,j) ∈ I×I} |f(i) − f(j)|² m(i,j)`, each unordered
    /// edge counted from both ends.
    pub fn energy(&self, f: &[f64]) -> f64 {
        self.edges.iter().map(|&(i, j, w)| (f[i] - f[j]).powi(2) * w).sum()
    }

    /// `Σ |f(i) − f̄|² m(i)` with the mass-weighted mean.
    pub fn variance(&self, f: &[f64]) -> f64 {
        let total: f64 = self.masses.iter().sum();
        let mean = f.iter().zip(&self.masses).map(|(v, m)| v * m).sum::<f64>() / total;
        f.iter().zip(&self.masses).map(|(v, m)| (v - mean).powi(2) * m).sum()
    }
}

/// Smallest `Λd` with `variance ≤ Λd 𝓔`, i.e. `1/μ₂` of the pencil
/// `(L_𝓔, diag m)`; `∞` for a disconnected graph.
pub fn discrete_poincare(g: &WeightedGraph) -> f64 {
    // 𝓔 counts each edge twice over ordered pairs, halved: the Laplacian
    // quadratic form f·Lf = Σ_edges w|Δf|² matches it exactly
    pencil_constant(&g.masses, &g.edges)
}

/// `Λc`: the largest Neumann constant of the `A*` and `A#` sets, which
/// bounds both local weak Poincaré inequalities of every triple.
pub fn local_continuous_constant(c: &GoodCovering, lattice: &WeightedLattice) -> Result<f64> {
    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut worst: f64 = 0.0;
    for (i, t) in c.triples.iter().enumerate() {
        if t.a_star.len() < 3 {
            return Err(PhymError::Resolution(format!("triple {i} has fewer than three cells")));
        }
        for set in [&t.a_star, &t.a_sharp] {
            let v = *cache.entry(set.clone()).or_insert_with(|| neumann_constant(lattice, set));
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

pub fn combined_bound(q1: f64, q2: f64, lambda_c: f64, lambda_d: f64) -> Result<f64> {
    if [q1, q2, lambda_c, lambda_d].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(PhymError::Precondition(format!(
            "combined bound needs positive finite inputs, got Q1 = {q1}, Q2 = {q2}, Λc = {lambda_c}, Λd = {lambda_d}"
        )));
    }
    Ok(q1 * lambda_c * (2.0 + q1 * q1 * q2 * lambda_d))
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareReport {
    pub sigma: f64,
    pub triples: usize,
    pub q1: f64,
    pub q2: f64,
    pub lambda_c: f64,
    pub lambda_d: f64,
    pub bound: f64,
}

pub fn poincare_bound(lattice: &WeightedLattice, sigma: f64) -> Result<PoincareReport> {
    let cov = build_covering(lattice, sigma)?;
    let lambda_c = local_continuous_constant(&cov, lattice)?;
    let lambda_d = discrete_poincare(&WeightedGraph::from_covering(&cov));
    let q1 = cov.q1 as f64;
    // a single triple has no graph part
    let bound = if cov.triples.len() == 1 { 2.0 * q1 * lambda_c } else { combined_bound(q1, cov.q2, lambda_c, lambda_d)? };
    Ok(PoincareReport { sigma, triples: cov.triples.len(), q1, q2: cov.q2, lambda_c, lambda_d, bound })
}

/// Radial samples of the model blow-up metric of complex dimension `n`:
/// volume density `r^{2n−1}(1 + (ε/r)^{2n−2})` on `[r_in, r_out]`.
#[derive(Clone, Debug, Serialize)]
pub struct BlowupProfile {
    pub n: usize,
    pub eps: f64,
    pub radii: Vec<f64>,
    pub density: Vec<f64>,
    /// `ω_ε^n / ω^n ≍ 1 + (ε/r)^{2n−2}`
    pub ratio: Vec<f64>,
}

pub fn volume_ratio(n: usize, eps: f64, r: f64) -> f64 {
    1.0 + (eps / r).powi(2 * n as i32 - 2)
}

impl BlowupProfile {
    pub fn new(n: usize, eps: f64, r_in: f64, r_out: f64, points: usize) -> Result<Self> {
        if !(eps >= 0.0 && eps <= 1.0) || !(r_in > 0.0 && r_out > r_in) || n < 1 || points < 3 {
            return Err(PhymError::Precondition("need ε ∈ [0, 1], 0 < r_in < r_out, n ≥ 1, three points".into()));
        }
        let h = (r_out - r_in) / (points - 1) as f64;
        let radii: Vec<f64> = (0..points).map(|k| r_in + k as f64 * h).collect();
        let ratio: Vec<f64> = radii.iter().map(|&r| volume_ratio(n, eps, r)).collect();
        let density = radii.iter().zip(&ratio).map(|(r, q)| r.powi(2 * n as i32 - 1) * q).collect();
        Ok(BlowupProfile { n, eps, radii, density, ratio })
    }

    pub fn lattice(&self) -> Result<WeightedLattice> {
        let r_in = self.radii[0];
        let r_out = *self.radii.last().unwrap();
        let d = GridDomain::boxed(&[r_out - r_in], &[self.radii.len()])?;
        WeightedLattice::with_density(&d, self.density.clone())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupSweep {
    pub n: usize,
    pub reports: Vec<(f64, PoincareReport)>,
    /// `max bound / min bound` over the sweep.
    pub spread: f64,
}

pub fn blowup_sweep(n: usize, epsilons: &[f64], annulus: (f64, f64), points: usize, sigma: f64) -> Result<BlowupSweep> {
    let mut reports = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(PhymError::Precondition(format!("ε = {eps} outside (0, 1]")));
        }
        let prof = BlowupProfile::new(n, eps, annulus.0, annulus.1, points)?;
        reports.push((eps, poincare_bound(&prof.lattice()?, sigma)?));
    }
    let hi = reports.iter().map(|r| r.1.bound).fold(0.0, f64::max);
    let lo = reports.iter().map(|r| r.1.bound).fold(f64::INFINITY, f64::min);
    Ok(BlowupSweep { n, reports, spread: hi / lo })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combined_bound_arithmetic() {
        assert_eq!(combined_bound(1.0, 1.0, 1.0, 1.0).unwrap(), 3.0);
        assert!(combined_bound(1.0, 1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn subset_check() {
        assert!(is_subset(&[1, 3], &[0, 1, 2, 3]));
        assert!(!is_subset(&[1, 4], &[0, 1, 2, 3]));
    }
}
