//! Correlation kernel and the SVD lower bound on the gap.

use rayon::prelude::*;

use crate::control::plane::detect_plane;
use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::numerics::{nuclear_norm2, svd3, Mat3, Vec3};
use crate::qfim::single_param_optima;

/// `𝒱(t₁, t₂) = Σ_i w_i V_i(t₁) V_i(t₂)ᵀ`, evaluated on demand.
#[derive(Debug, Clone)]
pub struct CorrelationKernel<'a> {
    velocities: &'a [Vec<Vec3>],
    weights: Vec<f64>,
}

impl<'a> CorrelationKernel<'a> {
    pub fn at(&self, k1: usize, k2: usize) -> Mat3 {
        self.velocities
            .iter()
            .zip(&self.weights)
            .fold(Mat3::ZERO, |acc, (v, w)| acc + Mat3::outer(v[k1], v[k2]).scale(*w))
    }

    pub fn nodes(&self) -> usize {
        self.velocities.first().map_or(0, Vec::len)
    }
}

pub fn correlation_kernel<'a>(velocities: &'a [Vec<Vec3>], w: &[f64]) -> Result<CorrelationKernel<'a>> {
    if w.len() != velocities.len() {
        return Err(Error::Dimension(format!("{} weights for {} parameters", w.len(), velocities.len())));
    }
    if let Some(bad) = w.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidInput(format!("weights must be finite and ≥ 0, got {bad}")));
    }
    Ok(CorrelationKernel { velocities, weights: w.to_vec() })
}

/// `Σ_i w_i J^opt_i − 4∬ Σ_j σ_j(𝒱(t₁, t₂)) dt₁dt₂`.
///
/// Planar velocity sets use the closed-form nuclear norm of the 2×2
/// in-plane block; otherwise each node pair goes through a 3×3 SVD.
pub fn svd_lower_bound(velocities: &[Vec<Vec3>], grid: &TimeGrid, w: &[f64]) -> Result<f64> {
    let kernel = correlation_kernel(velocities, w)?;
    if kernel.nodes() != grid.nodes() {
        return Err(Error::Dimension(format!("velocities have {} nodes, grid has {}", kernel.nodes(), grid.nodes())));
    }
    let opt = single_param_optima(velocities, grid)?;
    let total: f64 = opt.iter().zip(w).map(|(j, w)| j * w).sum();
    let q = grid.weights();
    let n = grid.nodes();
    let pair_sum: f64 = match detect_plane(velocities) {
        Ok(frame) => {
            let f = frame.scaled(w)?;
            let m = f.n_params();
            let row = |k: usize| -> f64 {
                let block = |l: usize| {
                    let (mut p, mut qq, mut r, mut s) = (0.0, 0.0, 0.0, 0.0);
                    for i in 0..m {
                        let (a1, b1, a2, b2) = (f.a[i][k], f.b[i][k], f.a[i][l], f.b[i][l]);
                        p += a1 * a2;
                        qq += a1 * b2;
                        r += b1 * a2;
                        s += b1 * b2;
                    }
                    nuclear_norm2(p, qq, r, s)
                };
                let off: f64 = (k + 1..n).map(|l| q[l] * block(l)).sum();
                q[k] * (q[k] * block(k) + 2.0 * off)
            };
            (0..n).into_par_iter().map(row).collect::<Vec<f64>>().iter().sum()
        }
        Err(Error::NonPlanar { .. }) => {
            let row = |k: usize| -> f64 {
                let off: f64 = (k + 1..n).map(|l| q[l] * svd3(&kernel.at(k, l)).sigma_sum()).sum();
                q[k] * (q[k] * svd3(&kernel.at(k, k)).sigma_sum() + 2.0 * off)
            };
            (0..n).into_par_iter().map(row).collect::<Vec<f64>>().iter().sum()
        }
        Err(Error::ZeroVelocity(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(total - 4.0 * pair_sum)
}
