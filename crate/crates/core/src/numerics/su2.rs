//! SU(2) propagators and the adjoint map onto SO(3).
//!
//! Convention: the spin rotation `exp(−i(α/2) n̂·σ)` maps to the proper
//! rotation by `α` about `n̂`, i.e. `u (w·σ) u† = (R(u) w)·σ`.

use num_complex::Complex64;

use super::linalg::{Mat2c, Mat3, Vec3};
use crate::error::{Error, Result};

/// Unitarity residual above which `so3_from_su2` rejects its input.
pub const UNITARITY_TOLERANCE: f64 = 1e-8;

/// `exp(−i (v·σ) dt) = cos(|v|dt)·I − i sin(|v|dt)(v̂·σ)`.
pub fn su2_exp(v: Vec3, dt: f64) -> Mat2c {
    let n = v.norm();
    let theta = n * dt;
    if n == 0.0 || theta == 0.0 {
        return Mat2c::IDENTITY;
    }
    let (s, c) = theta.sin_cos();
    let k = s / n;
    let (x, y, z) = (v.x * k, v.y * k, v.z * k);
    // c·I − i(x σx + y σy + z σz)
    Mat2c([[Complex64::new(c, -z), Complex64::new(-y, -x)], [Complex64::new(y, -x), Complex64::new(c, z)]])
}

/// Spin rotation whose SO(3) image is the rotation by `angle` about unit `axis`.
pub fn su2_rotation(axis: Vec3, angle: f64) -> Mat2c {
    su2_exp(axis, 0.5 * angle)
}

/// Inverse of [`su2_exp`] at `dt = 1` for an SU(2) element: returns `g` with
/// `exp(−i g·σ) = u`, choosing the rotation angle `|g|` in `[0, π]`.
///
/// Any global phase of `u` is discarded.
pub fn su2_log(u: &Mat2c) -> Vec3 {
    // strip a global phase so that det = 1
    let det = u.det();
    let m = u.scale(Complex64::from_polar(1.0, -0.5 * det.arg()));
    let a = &m.0;
    let mut cos_t = 0.5 * (a[0][0] + a[1][1]).re;
    let mut sx = -0.5 * (a[0][1] + a[1][0]).im;
    let mut sy = 0.5 * (a[1][0] - a[0][1]).re;
    let mut sz = -0.5 * (a[0][0] - a[1][1]).im;
    if cos_t < 0.0 {
        // −u has the same adjoint action and a smaller rotation angle
        cos_t = -cos_t;
        sx = -sx;
        sy = -sy;
        sz = -sz;
    }
    let s = Vec3::new(sx, sy, sz);
    let sin_t = s.norm();
    if sin_t == 0.0 {
        return Vec3::ZERO;
    }
    let theta = sin_t.atan2(cos_t);
    s.scale(theta / sin_t)
}

/// Adjoint map `R_jk = ½ Tr(σ_j u σ_k u†)`; rejects non-unitary input.
pub fn so3_from_su2(u: &Mat2c) -> Result<Mat3> {
    let residual = u.unitarity_residual();
    if !(residual <= UNITARITY_TOLERANCE) {
        return Err(Error::InvalidInput(format!("matrix is not unitary (residual {residual:e})")));
    }
    Ok(adjoint(u))
}

pub(crate) fn adjoint(u: &Mat2c) -> Mat3 {
    let ud = u.dagger();
    let conj: [Mat2c; 3] = std::array::from_fn(|k| *u * Mat2c::PAULI[k] * ud);
    let mut r = [[0.0; 3]; 3];
    for (j, row) in r.iter_mut().enumerate() {
        for (k, e) in row.iter_mut().enumerate() {
            *e = 0.5 * (Mat2c::PAULI[j] * conj[k]).trace().re;
        }
    }
    Mat3(r)
}

/// Bloch vector `w` of a traceless Hermitian matrix `h = w·σ`.
pub fn bloch_vector(h: &Mat2c) -> Vec3 {
    Vec3::new(
        0.5 * (Mat2c::PAULI[0] * *h).trace().re,
        0.5 * (Mat2c::PAULI[1] * *h).trace().re,
        0.5 * (Mat2c::PAULI[2] * *h).trace().re,
    )
}
