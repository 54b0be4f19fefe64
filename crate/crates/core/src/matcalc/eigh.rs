//! Cyclic Jacobi eigensolver for small Hermitian matrices.

use super::cmat::{CMat, C64, ZERO};

/// Eigen-decomposition `a = V diag(vals) V†`, eigenvalues ascending.
pub fn eigh(a: &CMat) -> ([f64; super::cmat::MAX_RANK], CMat) {
    let r = a.rank();
    let mut m = a.herm_part();
    let mut v = CMat::identity(r);
    let scale = m.norm();
    let mut vals = [0.0; super::cmat::MAX_RANK];
    if r > 1 && scale > 0.0 {
        for _sweep in 0..60 {
            let mut off = 0.0;
            for p in 0..r {
                for q in p + 1..r {
                    off += m[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= 1e-17 * scale {
                break;
            }
            for p in 0..r {
                for q in p + 1..r {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }
    }
    for (i, val) in vals.iter_mut().enumerate().take(r) {
        *val = m[(i, i)].re;
    }
    // insertion sort, carrying columns
    for i in 1..r {
        let mut j = i;
        while j > 0 && vals[j - 1] > vals[j] {
            vals.swap(j - 1, j);
            for k in 0..r {
                let t = v[(k, j - 1)];
                v[(k, j - 1)] = v[(k, j)];
                v[(k, j)] = t;
            }
            j -= 1;
        }
    }
    (vals, v)
}

fn rotate(m: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // J = D R with D = diag(1, conj(phase)) on (p,q)
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = phase.conj() * (-s);
    let jqq = phase.conj() * c;
    let r = m.rank();
    for k in 0..r {
        let (akp, akq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = akp * jpp + akq * jqp;
        m[(k, q)] = akp * jpq + akq * jqq;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
    for k in 0..r {
        let (apk, aqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        m[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_hermitian() {
        let a = CMat::from_rows(
            3,
            &[
                C64::new(1.0, 0.0), C64::new(0.5, 0.2), C64::new(-0.3, 1.1),
                C64::new(0.5, -0.2), C64::new(-2.0, 0.0), C64::new(0.7, 0.0),
                C64::new(-0.3, -1.1), C64::new(0.7, 0.0), C64::new(0.25, 0.0),
            ],
        );
        let (vals, v) = eigh(&a);
        let d = CMat::from_diag(&vals[..3]);
        assert!((v * d * v.adjoint() - a).norm() < 1e-13);
        assert!((v.adjoint() * v - CMat::identity(3)).norm() < 1e-13);
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
    }
}
