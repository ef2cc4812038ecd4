//! Piecewise-constant control search used as an oracle for the analytic
//! solutions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::control::nelder_mead::{Minimum, NelderMead};
use crate::control::plane::detect_plane;
use crate::dynamics::{
    generators, velocities, ControlSchedule, FieldModel, ParameterPoint, ScheduleKind, TimeGrid, MAX_SEGMENTS,
};
use crate::error::{Error, Result};
use crate::numerics::{Mat3, Vec3};
use crate::qfim::{gap, qfim_from_generators, single_param_optima, trace_crb};

/// Quantity the search optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Maximize `Σ_i w_i J_ii`, i.e. minimize the gap.
    #[default]
    WeightedDiagonal,
    /// Minimize `Tr(J⁻¹)`. Experimental.
    TraceCrb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceOptions {
    pub segments: usize,
    pub restarts: usize,
    pub seed: u64,
    pub objective: Objective,
    pub nelder_mead: NelderMead,
}

impl BruteForceOptions {
    pub fn new(segments: usize, restarts: usize, seed: u64) -> Self {
        BruteForceOptions {
            segments,
            restarts,
            seed,
            objective: Objective::WeightedDiagonal,
            nelder_mead: NelderMead::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub schedule: ControlSchedule,
    /// `Σ_i w_i (J^opt_i − J_ii)` of the returned schedule.
    pub gap: f64,
    pub weighted_diagonal: f64,
    pub j: Vec<Vec<f64>>,
    /// Best objective reached by each restart (lower is better).
    pub restart_values: Vec<f64>,
    pub best_restart: usize,
}

enum Parametrization {
    /// One angle per segment about the plane normal; `p[i][s]` in-plane sums.
    Planar { normal: Vec3, p: Vec<Vec<Complex64>> },
    /// Z-Y-Z Euler triple per segment.
    Euler { p: Vec<Vec<Vec3>> },
}

impl Parametrization {
    fn dim(&self, segments: usize) -> usize {
        match self {
            Parametrization::Planar { .. } => segments,
            Parametrization::Euler { .. } => 3 * segments,
        }
    }

    fn qfim(&self, theta: &[f64]) -> Vec<Vec<f64>> {
        match self {
            Parametrization::Planar { p, .. } => {
                let rot: Vec<Complex64> = theta.iter().map(|a| Complex64::from_polar(1.0, *a)).collect();
                let s: Vec<Complex64> = p.iter().map(|pi| pi.iter().zip(&rot).map(|(a, b)| a * b).sum()).collect();
                s.iter().map(|a| s.iter().map(|b| 4.0 * (a * b.conj()).re).collect()).collect()
            }
            Parametrization::Euler { p } => {
                let rot: Vec<Mat3> = theta.chunks(3).map(|c| Mat3::euler_zyz(c[0], c[1], c[2])).collect();
                let s: Vec<Vec3> = p
                    .iter()
                    .map(|pi| pi.iter().zip(&rot).fold(Vec3::ZERO, |acc, (v, r)| acc + r.mul_vec(*v)))
                    .collect();
                s.iter().map(|a| s.iter().map(|b| 4.0 * a.dot(*b)).collect()).collect()
            }
        }
    }
}

fn objective_value(objective: Objective, j: &[Vec<f64>], w: &[f64]) -> f64 {
    match objective {
        Objective::WeightedDiagonal => -(0..w.len()).map(|i| w[i] * j[i][i]).sum::<f64>(),
        Objective::TraceCrb => {
            let t = trace_crb(j);
            if t.is_finite() {
                t
            } else {
                f64::MAX
            }
        }
    }
}

/// Nelder–Mead search over piecewise-constant frame rotations.
///
/// Restart 0 starts from the identity control; restart `r > 0` starts from
/// angles drawn uniformly in `[−π, π]` by a ChaCha8 generator seeded with
/// `seed + r`. Restarts run in parallel and the winner is the lowest
/// objective, ties going to the lower restart index.
pub fn brute_force_optimize(
    model: &dyn FieldModel,
    x: &ParameterPoint,
    grid: &TimeGrid,
    opts: &BruteForceOptions,
) -> Result<BruteForceResult> {
    let segments = opts.segments;
    if segments == 0 || segments > MAX_SEGMENTS {
        return Err(Error::InvalidInput(format!("segments must be in 1..=64, got {segments}")));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidInput("at least one restart is required".into()));
    }
    let vel = velocities(model, &x.values, grid)?;
    let q = grid.weights();
    let seg_of: Vec<usize> = (0..grid.nodes()).map(|k| grid.segment_of(k, segments)).collect();
    let param = match detect_plane(&vel) {
        Ok(frame) => {
            let mut p = vec![vec![Complex64::new(0.0, 0.0); segments]; vel.len()];
            for (i, pi) in p.iter_mut().enumerate() {
                for k in 0..grid.nodes() {
                    pi[seg_of[k]] += frame.complex(i, k) * q[k];
                }
            }
            Parametrization::Planar { normal: frame.normal, p }
        }
        Err(Error::ZeroVelocity(_)) => {
            Parametrization::Planar { normal: Vec3::Z, p: vec![vec![Complex64::new(0.0, 0.0); segments]; vel.len()] }
        }
        Err(Error::NonPlanar { .. }) => {
            let mut p = vec![vec![Vec3::ZERO; segments]; vel.len()];
            for (i, pi) in p.iter_mut().enumerate() {
                for k in 0..grid.nodes() {
                    pi[seg_of[k]] += vel[i][k].scale(q[k]);
                }
            }
            Parametrization::Euler { p }
        }
        Err(e) => return Err(e),
    };
    let dim = param.dim(segments);
    let w = &x.weights;

    let runs: Vec<Minimum> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let start: Vec<f64> = if r == 0 {
                vec![0.0; dim]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
                (0..dim).map(|_| rng.gen_range(-PI..=PI)).collect()
            };
            opts.nelder_mead.minimize(|th| objective_value(opts.objective, &param.qfim(th), w), &start)
        })
        .collect();
    let best_restart = (0..runs.len()).fold(0, |b, r| if runs[r].value < runs[b].value { r } else { b });
    let theta = &runs[best_restart].x;

    let kind = ScheduleKind::BruteForce { segments, restarts: opts.restarts, seed: opts.seed };
    let schedule = match &param {
        Parametrization::Planar { normal, .. } => {
            let segs = theta.iter().map(|a| vec![*a]).collect();
            ControlSchedule::from_segments(kind, Some(*normal), segs, model, &x.values, grid)?
        }
        Parametrization::Euler { .. } => {
            let segs = theta.chunks(3).map(<[f64]>::to_vec).collect();
            ControlSchedule::from_segments(kind, None, segs, model, &x.values, grid)?
        }
    };
    let j = qfim_from_generators(&generators(&vel, &schedule, grid)?);
    let opt = single_param_optima(&vel, grid)?;
    let achieved = gap(&j, &opt, w)?;
    let weighted_diagonal = (0..w.len()).map(|i| w[i] * j[i][i]).sum();
    Ok(BruteForceResult {
        schedule,
        gap: achieved,
        weighted_diagonal,
        j,
        restart_values: runs.iter().map(|m| m.value).collect(),
        best_restart,
    })
}
