use num_complex::Complex64;
use rayon::prelude::*;

use crate::control::{detect_plane, PlanarFrame};
use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::numerics::Vec3;

/// `4∬[Σ_i|V_i(t₁)||V_i(t₂)| − √(C² + D²)] dt₁dt₂` for planar velocities.
pub fn minimal_gap_planar(velocities: &[Vec<Vec3>], grid: &TimeGrid) -> Result<f64> {
    minimal_gap_planar_weighted(velocities, grid, &vec![1.0; velocities.len()])
}

/// Weighted form: in-plane coordinates are scaled by `√w_i` first.
pub fn minimal_gap_planar_weighted(velocities: &[Vec<Vec3>], grid: &TimeGrid, w: &[f64]) -> Result<f64> {
    super::check_weights(w, velocities.len())?;
    let frame = detect_plane(velocities)?.scaled(w)?;
    if frame.nodes() != grid.nodes() {
        return Err(Error::Dimension(format!("velocities have {} nodes, grid has {}", frame.nodes(), grid.nodes())));
    }
    let q = grid.weights();
    let lengths: f64 = (0..frame.n_params())
        .map(|i| {
            let l: f64 = (0..frame.nodes()).map(|k| q[k] * frame.complex(i, k).norm()).sum();
            l * l
        })
        .sum();
    Ok((4.0 * (lengths - coherent_overlap(&frame, &q))).max(0.0))
}

/// `∬|Σ_i v_i(t₁) v̄_i(t₂)| dt₁dt₂` over the node lattice.
pub(crate) fn coherent_overlap(frame: &PlanarFrame, q: &[f64]) -> f64 {
    let n = frame.nodes();
    let cols: Vec<Vec<Complex64>> =
        (0..n).map(|k| (0..frame.n_params()).map(|i| frame.complex(i, k)).collect()).collect();
    let row = |k: usize| -> f64 {
        let a = &cols[k];
        let off: f64 = (k + 1..n)
            .map(|l| {
                let z: Complex64 = a.iter().zip(&cols[l]).map(|(p, r)| p * r.conj()).sum();
                q[l] * z.norm()
            })
            .sum();
        let diag: f64 = a.iter().map(|p| p.norm_sqr()).sum();
        q[k] * (q[k] * diag + 2.0 * off)
    };
    (0..n).into_par_iter().map(row).collect::<Vec<f64>>().iter().sum()
}
