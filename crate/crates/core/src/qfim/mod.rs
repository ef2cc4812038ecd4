//! Fisher-information quantities for the maximally entangled probe.

mod planar;
mod report;

pub use planar::{minimal_gap_planar, minimal_gap_planar_weighted};
pub use report::{is_diagonal, QfimReport};

use crate::dynamics::{evolve_entangled, validate_weights, ControlSchedule, FieldModel, GeneratorVector, TimeGrid};
use crate::error::{Error, Result};
use crate::numerics::{integrate, sym_eigen, Vec3};

/// Smallest admissible finite-difference step.
pub const MIN_FD_STEP: f64 = 1e-9;

/// Relative eigenvalue floor below which the QFIM counts as singular.
pub const SINGULAR_RATIO: f64 = 1e-12;

/// `J_ij = 4 s_i·s_j`.
pub fn qfim_from_generators(gens: &[GeneratorVector]) -> Vec<Vec<f64>> {
    gens.iter().map(|a| gens.iter().map(|b| 4.0 * a.s.dot(b.s)).collect()).collect()
}

/// Per-parameter step `h·max(1, |x_i|)`.
pub fn fd_step(h: f64, xi: f64) -> f64 {
    h * xi.abs().max(1.0)
}

/// Central-difference derivatives `∂_i|φ⟩` of the evolved state, with the
/// schedule held fixed.
pub(crate) fn state_derivatives(
    model: &dyn FieldModel,
    x: &[f64],
    grid: &TimeGrid,
    schedule: &ControlSchedule,
    h: f64,
) -> Result<Vec<[num_complex::Complex64; 4]>> {
    if !(h.is_finite() && h >= MIN_FD_STEP) {
        return Err(Error::StepTooSmall(h));
    }
    (0..x.len())
        .map(|i| {
            let hi = fd_step(h, x[i]);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += hi;
            xm[i] -= hi;
            let p = evolve_entangled(model, &xp, grid, schedule)?;
            let m = evolve_entangled(model, &xm, grid, schedule)?;
            Ok(std::array::from_fn(|j| (p.amplitudes[j] - m.amplitudes[j]) / (2.0 * hi)))
        })
        .collect()
}

/// `J_ij = 4 Re(⟨∂_iφ|∂_jφ⟩ − ⟨∂_iφ|φ⟩⟨φ|∂_jφ⟩)` from finite differences of
/// the evolved state.
pub fn qfim_from_state(
    model: &dyn FieldModel,
    x: &[f64],
    grid: &TimeGrid,
    schedule: &ControlSchedule,
    h: f64,
) -> Result<Vec<Vec<f64>>> {
    let d = state_derivatives(model, x, grid, schedule, h)?;
    let phi = evolve_entangled(model, x, grid, schedule)?.amplitudes;
    let dot = |a: &[num_complex::Complex64; 4], b: &[num_complex::Complex64; 4]| {
        a.iter().zip(b).map(|(p, q)| p.conj() * q).sum::<num_complex::Complex64>()
    };
    let proj: Vec<_> = d.iter().map(|di| dot(di, &phi)).collect();
    let n = d.len();
    let mut j = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a..n {
            let v = 4.0 * (dot(&d[a], &d[b]) - proj[a] * proj[b].conj()).re;
            j[a][b] = v;
            j[b][a] = v;
        }
    }
    Ok(j)
}

/// `J^opt_i = 4 (∫|V_i| dt)²`.
pub fn single_param_optimum(velocities: &[Vec<Vec3>], grid: &TimeGrid, i: usize) -> Result<f64> {
    let v = velocities.get(i).ok_or_else(|| Error::Dimension(format!("no velocity for parameter {i}")))?;
    if v.len() != grid.nodes() {
        return Err(Error::Dimension(format!("velocity has {} nodes, grid has {}", v.len(), grid.nodes())));
    }
    let mags: Vec<f64> = v.iter().map(|v| v.norm()).collect();
    let l = integrate(&mags, grid.dt())?;
    Ok(4.0 * l * l)
}

pub fn single_param_optima(velocities: &[Vec<Vec3>], grid: &TimeGrid) -> Result<Vec<f64>> {
    (0..velocities.len()).map(|i| single_param_optimum(velocities, grid, i)).collect()
}

/// `Σ_i w_i (J^opt_i − J_ii)`.
pub fn gap(j: &[Vec<f64>], j_opt: &[f64], w: &[f64]) -> Result<f64> {
    if j.len() != j_opt.len() || w.len() != j_opt.len() {
        return Err(Error::Dimension(format!(
            "QFIM is {}×{}, {} optima, {} weights",
            j.len(),
            j.len(),
            j_opt.len(),
            w.len()
        )));
    }
    if let Some(bad) = w.iter().find(|w| !(**w >= 0.0)) {
        return Err(Error::InvalidInput(format!("negative weight {bad}")));
    }
    Ok((0..w.len()).map(|i| w[i] * (j_opt[i] - j[i][i])).sum())
}

/// Unweighted gap `Σ_i (J^opt_i − J_ii)`.
pub fn uniform_gap(j: &[Vec<f64>], j_opt: &[f64]) -> Result<f64> {
    gap(j, j_opt, &vec![1.0; j_opt.len()])
}

/// `Tr(J⁻¹)`, or `+∞` when `λ_min < 1e-12·λ_max`.
pub fn trace_crb(j: &[Vec<f64>]) -> f64 {
    let e = sym_eigen(j);
    let (Some(&max), Some(&min)) = (e.values.first(), e.values.last()) else {
        return f64::INFINITY;
    };
    if !(max > 0.0) || min < SINGULAR_RATIO * max {
        return f64::INFINITY;
    }
    e.values.iter().map(|l| 1.0 / l).sum()
}

/// Checks weights and that `J` is symmetric.
pub(crate) fn check_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::Dimension(format!("{} weights for {n} parameters", w.len())));
    }
    validate_weights(w)
}
