use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{sym_eigen, Vec3};

/// Relative scatter eigenvalue below which the velocity set counts as planar.
pub const PLANAR_RATIO: f64 = 1e-9;

/// Orthonormal frame `(e1, e2, normal)` of the plane containing all
/// velocities, with per-node in-plane coordinates `v = a + ib`.
///
/// A rotation by `α` about `normal` multiplies `v` by `e^{iα}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarFrame {
    pub normal: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    /// `a[i][k] = V_i(t_k)·e1`, times `scale[i]`.
    pub a: Vec<Vec<f64>>,
    /// `b[i][k] = V_i(t_k)·e2`, times `scale[i]`.
    pub b: Vec<Vec<f64>>,
    /// Per-parameter amplitude scaling, `√w_i` for weighted problems.
    pub scale: Vec<f64>,
}

impl PlanarFrame {
    pub fn n_params(&self) -> usize {
        self.a.len()
    }

    pub fn nodes(&self) -> usize {
        self.a.first().map_or(0, Vec::len)
    }

    #[inline]
    pub fn complex(&self, i: usize, k: usize) -> Complex64 {
        Complex64::new(self.a[i][k], self.b[i][k])
    }

    /// Rescales parameter `i` by `√w_i` (on top of any existing scaling).
    pub fn scaled(&self, w: &[f64]) -> Result<PlanarFrame> {
        if w.len() != self.n_params() {
            return Err(Error::Dimension(format!("{} weights for {} parameters", w.len(), self.n_params())));
        }
        if let Some(bad) = w.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidInput(format!("weights must be finite and ≥ 0, got {bad}")));
        }
        let mut out = self.clone();
        for (i, wi) in w.iter().enumerate() {
            let r = wi.sqrt();
            out.a[i].iter_mut().for_each(|v| *v *= r);
            out.b[i].iter_mut().for_each(|v| *v *= r);
            out.scale[i] *= r;
        }
        Ok(out)
    }
}

fn canonical_sign(v: Vec3) -> Vec3 {
    let c = v.to_array();
    let big = (0..3).fold(0, |best, j| if c[j].abs() > c[best].abs() { j } else { best });
    if c[big] < 0.0 {
        -v
    } else {
        v
    }
}

/// Finds the plane spanned by all velocities and projects onto it.
pub fn detect_plane(velocities: &[Vec<Vec3>]) -> Result<PlanarFrame> {
    let mut scatter = vec![vec![0.0; 3]; 3];
    let mut vmax = 0.0_f64;
    for v in velocities.iter().flatten() {
        let c = v.to_array();
        for r in 0..3 {
            for s in 0..3 {
                scatter[r][s] += c[r] * c[s];
            }
        }
        vmax = vmax.max(v.norm());
    }
    if !(vmax > 0.0) {
        return Err(Error::ZeroVelocity(" for every parameter".into()));
    }
    let e = sym_eigen(&scatter);
    let col = |c: usize| Vec3::new(e.vectors[0][c], e.vectors[1][c], e.vectors[2][c]);
    let ratio = (e.values[2] / e.values[0]).max(0.0);
    if ratio > PLANAR_RATIO {
        return Err(Error::NonPlanar { ratio });
    }
    let normal = canonical_sign(col(2)).normalized().ok_or(Error::NonPlanar { ratio })?;
    let e1 = col(0);
    let e1 = canonical_sign(e1 - normal.scale(normal.dot(e1))).normalized().ok_or(Error::NonPlanar { ratio })?;
    let e2 = normal.cross(e1);
    let out_of_plane = velocities.iter().flatten().map(|v| v.dot(normal).abs()).fold(0.0, f64::max);
    if out_of_plane > PLANAR_RATIO * vmax {
        return Err(Error::NonPlanar { ratio: (out_of_plane / vmax).powi(2) });
    }
    let a = velocities.iter().map(|vi| vi.iter().map(|v| v.dot(e1)).collect()).collect();
    let b = velocities.iter().map(|vi| vi.iter().map(|v| v.dot(e2)).collect()).collect();
    Ok(PlanarFrame { normal, e1, e2, a, b, scale: vec![1.0; velocities.len()] })
}
