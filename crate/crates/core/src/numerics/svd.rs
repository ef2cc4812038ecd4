//! 3×3 singular value decomposition and the nearest-orthogonal-matrix map.
//!
//! The right singular vectors come from Jacobi rotations that diagonalize
//! `mᵀm`. The rotations are applied one-sided to the columns of `m`, so the
//! singular values are read off as column norms rather than as square roots
//! of eigenvalues, which keeps small singular values accurate.

use super::linalg::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Svd3 {
    pub u: Mat3,
    /// Singular values, descending, all ≥ 0.
    pub sigma: [f64; 3],
    pub v: Mat3,
}

impl Svd3 {
    pub fn reconstruct(&self) -> Mat3 {
        self.u * Mat3::diag(self.sigma) * self.v.transpose()
    }

    pub fn sigma_sum(&self) -> f64 {
        self.sigma.iter().sum()
    }
}

const SWEEPS: usize = 30;

pub fn svd3(m: &Mat3) -> Svd3 {
    // columns of b = m·v, rotated until mutually orthogonal
    let mut b = [m.col(0), m.col(1), m.col(2)];
    let mut v = [Vec3::X, Vec3::Y, Vec3::Z];
    let scale = m.frobenius();
    if scale == 0.0 {
        return Svd3 { u: Mat3::IDENTITY, sigma: [0.0; 3], v: Mat3::IDENTITY };
    }

    for _ in 0..SWEEPS {
        let mut rotated = false;
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let alpha = b[p].norm_sq();
            let beta = b[q].norm_sq();
            let gamma = b[p].dot(b[q]);
            if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let t = if zeta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            let (bp, bq) = (b[p], b[q]);
            b[p] = bp.scale(c) - bq.scale(s);
            b[q] = bp.scale(s) + bq.scale(c);
            let (vp, vq) = (v[p], v[q]);
            v[p] = vp.scale(c) - vq.scale(s);
            v[q] = vp.scale(s) + vq.scale(c);
        }
        if !rotated {
            break;
        }
    }

    let mut order = [0usize, 1, 2];
    let norms = [b[0].norm(), b[1].norm(), b[2].norm()];
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let sigma = [norms[order[0]], norms[order[1]], norms[order[2]]];
    let vs = [v[order[0]], v[order[1]], v[order[2]]];
    let bs = [b[order[0]], b[order[1]], b[order[2]]];

    // sign fixing u_j = m v_j / σ_j, completing the basis where σ_j vanishes
    let tiny = 1e-300_f64.max(scale * 1e-200);
    let mut u = [Vec3::ZERO; 3];
    let mut have = 0;
    for j in 0..3 {
        if sigma[j] > tiny {
            let mut c = bs[j].scale(1.0 / sigma[j]);
            for prev in u.iter().take(j) {
                c = c - prev.scale(prev.dot(c));
            }
            match c.normalized() {
                Some(c) => {
                    u[j] = c;
                    have += 1;
                }
                None => break,
            }
        } else {
            break;
        }
    }
    if have == 0 {
        u[0] = Vec3::X;
        have = 1;
    }
    if have == 1 {
        u[1] = u[0].any_orthogonal();
        have = 2;
    }
    if have == 2 {
        u[2] = u[0].cross(u[1]);
    }

    Svd3 { u: Mat3::from_cols(u[0], u[1], u[2]), sigma, v: Mat3::from_cols(vs[0], vs[1], vs[2]) }
}

/// `Q = U Vᵀ`, the orthogonal matrix maximizing `Tr(Qᵀ m)`.
///
/// `det Q` may be −1 when `det m < 0`.
pub fn nearest_orthogonal(m: &Mat3) -> Mat3 {
    let s = svd3(m);
    s.u * s.v.transpose()
}

/// Nuclear norm (sum of singular values) of the 2×2 matrix `[[p, q], [r, s]]`.
#[inline]
pub fn nuclear_norm2(p: f64, q: f64, r: f64, s: f64) -> f64 {
    (p + s).hypot(q - r).max((p - s).hypot(q + r))
}
