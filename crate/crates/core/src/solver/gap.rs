use super::FourierPreconditioner;
use crate::error::{PhymError, Result};
use crate::geometry::GridDomain;
use std::f64::consts::PI;

/// Least eigenvalue of the discrete `∂̄*∂̄ = ½∇*∇` on trace-free
/// endomorphisms of a flat, possibly twisted bundle over a torus; for rank 1
/// the mean-zero functions. Zero means the bundle is not simple.
pub fn spectral_gap(domain: &GridDomain, rank: usize) -> Result<f64> {
    if (0..domain.dim).any(|a| !domain.is_periodic(a)) {
        return Err(PhymError::Unsupported("spectral gap needs a torus cross-section".into()));
    }
    if rank == 1 {
        // smallest non-zero frequency along any axis
        return Ok((0..domain.dim)
            .map(|a| {
                let (n, h) = (domain.points[a] as f64, domain.h[a]);
                0.5 * (2.0 / h).powi(2) * (PI / n).sin().powi(2)
            })
            .fold(f64::INFINITY, f64::min));
    }
    let gap = FourierPreconditioner::new(domain, rank, 0.0)?.least_symbol();
    if !gap.is_finite() {
        return Err(PhymError::Numeric("no trace-free modes found".into()));
    }
    Ok(gap.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::heisenberg_pair;

    #[test]
    fn reference_gaps() {
        let g1 = spectral_gap(&GridDomain::unit_torus(1, 64), 1).unwrap();
        let want = 0.5 * (2.0 * PI).powi(2);
        assert!((g1 - want).abs() / want < 2.0 * (PI / 64.0).powi(2));
        assert_eq!(spectral_gap(&GridDomain::unit_torus(1, 16), 2).unwrap(), 0.0);
        let (u, v) = heisenberg_pair(2);
        let d = GridDomain::unit_torus(1, 64).with_twist(vec![Some(u), Some(v)]).unwrap();
        assert!(spectral_gap(&d, 2).unwrap() > 0.1);
    }
}
