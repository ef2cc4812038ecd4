//! First-order optimality check for a schedule's frame profile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{velocities, ControlSchedule, FieldModel, ParameterPoint, TimeGrid};
use crate::error::{Error, Result};
use crate::numerics::{Mat3, Vec3};
use crate::qfim::single_param_optima;

pub const STATIONARITY_DIRECTIONS: usize = 32;
pub const STATIONARITY_SEGMENTS: usize = 32;
pub const STATIONARITY_SEED: u64 = 0x5eed_0019;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub perturbation: f64,
    /// Largest odd part `|Δ₊ − Δ₋|/2` of the objective response.
    pub first_order_residual: f64,
    /// Largest `|Δ₊ + Δ₋|/2 / (p²·Σ w_i J^opt_i)`.
    pub quadratic_coefficient: f64,
    /// `1e-3 · p · Σ w_i J^opt_i`.
    pub threshold: f64,
    pub passed: bool,
}

fn weighted_diagonal(frames: &[Mat3], vel: &[Vec<Vec3>], q: &[f64], w: &[f64]) -> f64 {
    vel.iter()
        .zip(w)
        .map(|(vi, wi)| {
            let s = frames.iter().zip(vi).zip(q).fold(Vec3::ZERO, |acc, ((r, v), qk)| acc + r.mul_vec(*v).scale(*qk));
            4.0 * wi * s.norm_sq()
        })
        .sum()
}

/// Probes `Σ w_i J_ii` along 32 random piecewise-constant rotations of the
/// frames. Each direction draws one coefficient per segment in `[−1, 1]` and
/// left-multiplies the frames of segment `s` by `Rot(axis, ±p·c_s)`. The
/// axis is the schedule's plane normal when it has one, else a random unit
/// vector per direction.
pub fn verify_stationarity(
    model: &dyn FieldModel,
    x: &ParameterPoint,
    grid: &TimeGrid,
    schedule: &ControlSchedule,
    perturbation: f64,
) -> Result<StationarityReport> {
    if !(perturbation.is_finite() && perturbation > 0.0) {
        return Err(Error::InvalidInput(format!("perturbation must be positive, got {perturbation}")));
    }
    if schedule.steps() != grid.steps() {
        return Err(Error::Dimension(format!("schedule has {} steps, grid has {}", schedule.steps(), grid.steps())));
    }
    let vel = velocities(model, &x.values, grid)?;
    let q = grid.weights();
    let w = &x.weights;
    let scale: f64 = single_param_optima(&vel, grid)?.iter().zip(w).map(|(j, w)| j * w).sum();
    let frames = schedule.frames();
    let base = weighted_diagonal(frames, &vel, &q, w);
    let normal = schedule.spec().normal.map(Vec3::from_array);

    let mut rng = ChaCha8Rng::seed_from_u64(STATIONARITY_SEED);
    let mut odd = 0.0_f64;
    let mut even = 0.0_f64;
    for _ in 0..STATIONARITY_DIRECTIONS {
        let coeff: Vec<f64> = (0..STATIONARITY_SEGMENTS).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let axis = match normal {
            Some(n) => n,
            None => loop {
                let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if let Some(u) = v.normalized() {
                    break u;
                }
            },
        };
        let mut response = [0.0; 2];
        for (slot, sign) in [1.0, -1.0].iter().enumerate() {
            let rots: Vec<Mat3> = coeff.iter().map(|c| Mat3::rotation(axis, sign * perturbation * c)).collect();
            let perturbed: Vec<Mat3> =
                frames.iter().enumerate().map(|(k, r)| rots[grid.segment_of(k, STATIONARITY_SEGMENTS)] * *r).collect();
            response[slot] = weighted_diagonal(&perturbed, &vel, &q, w) - base;
        }
        odd = odd.max(0.5 * (response[0] - response[1]).abs());
        even = even.max(0.5 * (response[0] + response[1]).abs());
    }
    let threshold = 1e-3 * perturbation * scale;
    let quadratic_coefficient = if scale > 0.0 { even / (perturbation * perturbation * scale) } else { 0.0 };
    Ok(StationarityReport {
        perturbation,
        first_order_residual: odd,
        quadratic_coefficient,
        threshold,
        passed: odd < threshold || (scale == 0.0 && odd == 0.0),
    })
}
