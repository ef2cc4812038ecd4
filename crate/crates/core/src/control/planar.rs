//! Closed-form joint control for velocities confined to a plane.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::plane::{detect_plane, PlanarFrame};
use crate::dynamics::{velocities, ControlSchedule, FieldModel, ParameterPoint, ScheduleKind, TimeGrid};
use crate::error::{Error, Result};
use crate::numerics::{Mat2c, Vec3};

/// Node masses below this fraction of the maximum are treated as zero.
pub const REFERENCE_FLOOR: f64 = 1e-12;

/// Coarse partition used for the π-offset candidates.
pub const PI_CANDIDATE_SEGMENTS: usize = 8;

/// Fixed-point sweeps applied to each candidate profile.
pub const POLISH_ITERATIONS: usize = 300;

/// Rotation angle about the plane normal at each node, unwrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaProfile {
    pub alpha: Vec<f64>,
    pub reference_index: usize,
}

fn wrap(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

fn masses(frame: &PlanarFrame) -> Vec<f64> {
    (0..frame.nodes()).map(|k| (0..frame.n_params()).map(|i| frame.complex(i, k).norm_sqr()).sum()).collect()
}

fn reference_node(frame: &PlanarFrame) -> Result<usize> {
    let m = masses(frame);
    let max = m.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::ZeroVelocity(" on the whole grid".into()));
    }
    Ok(m.iter().position(|&v| v > REFERENCE_FLOOR * max).unwrap_or(0))
}

/// Phase of `target` per node, holding the previous value where it is
/// undefined, then unwrapped and shifted to vanish at `k0`. Nodes before
/// `k0` are set to 0.
fn unwrap_anchor(raw: Vec<Option<f64>>, k0: usize) -> Vec<f64> {
    let mut out = vec![0.0; raw.len()];
    let mut prev = raw[k0].unwrap_or(0.0);
    for k in k0..raw.len() {
        let a = match raw[k] {
            Some(a) => prev + wrap(a - prev),
            None => prev,
        };
        out[k] = a;
        prev = a;
    }
    let base = out[k0];
    for a in out.iter_mut().skip(k0) {
        *a -= base;
    }
    out
}

fn phase(z: Complex64, scale: f64) -> Option<f64> {
    (z.norm() > 1e-14 * scale && z.norm() > 0.0).then(|| z.arg())
}

/// Anchored rotation profile aligning every velocity with its direction at
/// the reference node: `α_t = arg Σ_i r_i v̄_i(t)`.
///
/// The reference node is the first one whose (scaled) velocity mass exceeds
/// `1e-12` of the maximum. When that node is not `t = 0`, the references are
/// the normalized directions `V_i/|V_i|` there (times the parameter scale),
/// standing in for the limit `t → 0⁺`.
pub fn planar_alpha(frame: &PlanarFrame, _grid: &TimeGrid) -> Result<AlphaProfile> {
    let k0 = reference_node(frame)?;
    let r: Vec<Complex64> = (0..frame.n_params())
        .map(|i| {
            let v = frame.complex(i, k0);
            if k0 == 0 || v.norm() == 0.0 {
                v
            } else {
                v / v.norm() * frame.scale[i]
            }
        })
        .collect();
    let raw = (0..frame.nodes())
        .map(|k| {
            let mut z = Complex64::new(0.0, 0.0);
            let mut scale = 0.0;
            for (i, ri) in r.iter().enumerate() {
                let v = frame.complex(i, k);
                z += ri * v.conj();
                scale += ri.norm() * v.norm();
            }
            phase(z, scale)
        })
        .collect();
    Ok(AlphaProfile { alpha: unwrap_anchor(raw, k0), reference_index: k0 })
}

/// `Σ_i w_i J_ii` of a profile, in the frame's (weight-scaled) coordinates.
pub fn planar_objective(frame: &PlanarFrame, q: &[f64], alpha: &[f64]) -> f64 {
    generators_planar(frame, q, alpha).iter().map(|s| 4.0 * s.norm_sqr()).sum()
}

fn generators_planar(frame: &PlanarFrame, q: &[f64], alpha: &[f64]) -> Vec<Complex64> {
    let rot: Vec<Complex64> = alpha.iter().zip(q).map(|(a, w)| Complex64::from_polar(*w, *a)).collect();
    (0..frame.n_params()).map(|i| (0..frame.nodes()).map(|k| rot[k] * frame.complex(i, k)).sum()).collect()
}

/// Fixed-point iteration `α_t ← arg Σ_i S_i v̄_i(t)`, which never decreases
/// the objective (each step maximizes a linear minorant of the convex
/// objective).
pub fn polish_alpha(frame: &PlanarFrame, q: &[f64], alpha: &[f64], k0: usize, iterations: usize) -> Vec<f64> {
    let mut cur = alpha.to_vec();
    let mut value = planar_objective(frame, q, &cur);
    for _ in 0..iterations {
        let s = generators_planar(frame, q, &cur);
        let raw = (0..frame.nodes())
            .map(|k| {
                let mut z = Complex64::new(0.0, 0.0);
                let mut scale = 0.0;
                for (i, si) in s.iter().enumerate() {
                    let v = frame.complex(i, k);
                    z += si * v.conj();
                    scale += si.norm() * v.norm();
                }
                phase(z, scale)
            })
            .collect::<Vec<_>>();
        let next: Vec<f64> = raw.iter().zip(&cur).map(|(r, c)| r.unwrap_or(*c)).collect();
        let next = unwrap_anchor(next.into_iter().map(Some).collect(), k0);
        let next_value = planar_objective(frame, q, &next);
        if !(next_value >= value * (1.0 - 1e-15)) {
            break;
        }
        let step = next.iter().zip(&cur).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let done = step < 1e-13;
        cur = next;
        value = next_value;
        if done {
            break;
        }
    }
    cur
}

/// Candidate profiles: the anchored profile plus a π offset switched on at
/// each interior boundary of an 8-segment partition.
pub fn pi_candidates(base: &AlphaProfile, grid: &TimeGrid) -> Vec<Vec<f64>> {
    let mut out = vec![base.alpha.clone()];
    for j in 1..PI_CANDIDATE_SEGMENTS {
        let t_switch = grid.t_max() * j as f64 / PI_CANDIDATE_SEGMENTS as f64;
        out.push(
            base.alpha.iter().enumerate().map(|(k, a)| if grid.time(k) >= t_switch { a + PI } else { *a }).collect(),
        );
    }
    out
}

/// Joint control for planar velocity sets: `R(t_k) = Rot(n̂, α_k)`.
pub fn planar_optimal_schedule(model: &dyn FieldModel, x: &ParameterPoint, grid: &TimeGrid) -> Result<ControlSchedule> {
    let vel = velocities(model, &x.values, grid)?;
    let frame = detect_plane(&vel)?.scaled(&x.weights)?;
    let base = planar_alpha(&frame, grid)?;
    let q = grid.weights();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for cand in pi_candidates(&base, grid) {
        let polished = polish_alpha(&frame, &q, &cand, base.reference_index, POLISH_ITERATIONS);
        let value = planar_objective(&frame, &q, &polished);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, polished));
        }
    }
    let (_, alpha) = best.expect("at least one candidate");
    ControlSchedule::from_planar_profile(ScheduleKind::PlanarOptimal, frame.normal, alpha, model, &x.values, grid)
}

/// Control that keeps `R(t)·V_i(t)` parallel to the reference direction of
/// `V_i`, attaining `J_ii = J^opt_i`.
pub fn single_param_schedule(model: &dyn FieldModel, x0: &[f64], grid: &TimeGrid, i: usize) -> Result<ControlSchedule> {
    if i >= model.n_params() {
        return Err(Error::InvalidInput(format!("parameter index {i} out of range")));
    }
    let vel = velocities(model, x0, grid)?;
    let vi = vec![vel[i].clone()];
    let kind = ScheduleKind::SingleParam { param: model.param_names()[i].clone() };
    if vi[0].iter().all(|v| v.norm() == 0.0) {
        return Err(Error::ZeroVelocity(format!(" for parameter {i}")));
    }
    match detect_plane(&vi) {
        Ok(frame) => {
            let profile = planar_alpha(&frame, grid)?;
            ControlSchedule::from_planar_profile(kind, frame.normal, profile.alpha, model, x0, grid)
        }
        Err(Error::NonPlanar { .. }) => {
            let net = transport_lock(&vi[0]);
            let spec = crate::dynamics::ScheduleSpec::from_kind(kind);
            ControlSchedule::from_net_propagators(spec, model, x0, grid, net)
        }
        Err(e) => Err(e),
    }
}

/// Net propagators whose frames rotate each `v_k` onto the first nonzero
/// direction by the smallest rotation.
fn transport_lock(v: &[Vec3]) -> Vec<Mat2c> {
    let max = v.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let k0 = v.iter().position(|v| v.norm() > 1e-6 * max).unwrap_or(0);
    let target = v[k0].normalized().unwrap_or(Vec3::X);
    let mut last = Mat2c::IDENTITY;
    v.iter()
        .enumerate()
        .map(|(k, vk)| {
            if k < k0 {
                return Mat2c::IDENTITY;
            }
            if let Some(u) = vk.normalized() {
                let c = u.cross(target);
                let angle = c.norm().atan2(u.dot(target));
                let axis = c.normalized().unwrap_or_else(|| u.any_orthogonal());
                last = crate::numerics::su2_rotation(axis, angle).dagger();
            }
            last
        })
        .collect()
}

/// Largest mismatch between `α_k − α_l` and `atan2(D, C)` over random node
/// pairs, where `C + iD = Σ_i v̄_i(t_k) v_i(t_l)`.
pub fn pairwise_residual(frame: &PlanarFrame, alpha: &[f64], pairs: usize, seed: u64) -> f64 {
    let m = masses(frame);
    let max = m.iter().cloned().fold(0.0, f64::max);
    let live: Vec<usize> = (0..frame.nodes()).filter(|&k| m[k] > 1e-6 * max).collect();
    if live.len() < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..pairs {
        let k = live[rng.gen_range(0..live.len())];
        let l = live[rng.gen_range(0..live.len())];
        let z: Complex64 = (0..frame.n_params()).map(|i| frame.complex(i, k).conj() * frame.complex(i, l)).sum();
        if z.norm() < 1e-12 * max {
            continue;
        }
        worst = worst.max(wrap(alpha[k] - alpha[l] - z.arg()).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_schedule, generators, AcField, DcField, TwoFrequencyField};
    use crate::numerics::Mat3;
    use crate::qfim::{qfim_from_generators, single_param_optima};

    fn j_of(
        model: &dyn FieldModel,
        x: &ParameterPoint,
        g: &TimeGrid,
        s: &ControlSchedule,
    ) -> (Vec<Vec<f64>>, Vec<f64>) {
        let v = velocities(model, &x.values, g).unwrap();
        (qfim_from_generators(&generators(&v, s, g).unwrap()), single_param_optima(&v, g).unwrap())
    }

    #[test]
    fn dc_reduces_to_time_reversal() {
        let g = TimeGrid::new(1.0, 400).unwrap();
        let x = ParameterPoint::uniform(vec![1.0, 0.5]).unwrap();
        let s = planar_optimal_schedule(&DcField, &x, &g).unwrap();
        for r in s.frames() {
            assert!((*r - Mat3::IDENTITY).frobenius() < 1e-14);
        }
    }

    #[test]
    fn ac_profile_tracks_the_drive() {
        let g = TimeGrid::new(1.0, 4000).unwrap();
        let x = ParameterPoint::uniform(vec![1.0, 2.0]).unwrap();
        let v = velocities(&AcField, &x.values, &g).unwrap();
        let frame = detect_plane(&v).unwrap();
        let p = planar_alpha(&frame, &g).unwrap();
        // frame normal is +y: V_B turns by −ωt about it, so α = +ωt undoes it
        assert!((frame.normal - Vec3::Y).norm() < 1e-12);
        for k in [0, 1000, 4000] {
            assert!((p.alpha[k] - 2.0 * g.time(k)).abs() < 1e-8);
        }
        let s = planar_optimal_schedule(&AcField, &x, &g).unwrap();
        let (j, opt) = j_of(&AcField, &x, &g, &s);
        for i in 0..2 {
            assert!((j[i][i] / opt[i] - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn two_frequency_profile_is_slow_rotation() {
        let g = TimeGrid::new(1.0, 2000).unwrap();
        let x = ParameterPoint::uniform(vec![1.5, 1.0]).unwrap();
        let v = velocities(&TwoFrequencyField, &x.values, &g).unwrap();
        let frame = detect_plane(&v).unwrap();
        let p = planar_alpha(&frame, &g).unwrap();
        assert_eq!(p.reference_index, 1);
        assert_eq!(p.alpha[0], 0.0);
        assert_eq!(p.alpha[1], 0.0);
        // the sense of rotation depends on the in-plane basis orientation
        let sense = p.alpha[2000].signum();
        for k in [500, 1000, 2000] {
            let expect = sense * 0.25 * (g.time(k) - g.time(1));
            assert!((p.alpha[k] - expect).abs() < 1e-9, "{} vs {expect}", p.alpha[k]);
        }
        assert!(p.alpha.windows(2).all(|w| (w[1] - w[0]).abs() < PI));
        assert!(pairwise_residual(&frame, &p.alpha, 50, 3) < 1e-6);
    }

    #[test]
    fn two_frequency_beats_single_parameter_control() {
        let g = TimeGrid::new(1.0, 2000).unwrap();
        let x = ParameterPoint::uniform(vec![1.5, 1.0]).unwrap();
        let p = planar_optimal_schedule(&TwoFrequencyField, &x, &g).unwrap();
        let m = build_schedule(&ScheduleKind::SingleParam { param: "x_m".into() }, &TwoFrequencyField, &x, &g).unwrap();
        let (jp, opt) = j_of(&TwoFrequencyField, &x, &g, &p);
        let (jm, _) = j_of(&TwoFrequencyField, &x, &g, &m);
        let gp = opt[0] + opt[1] - jp[0][0] - jp[1][1];
        let gm = opt[0] + opt[1] - jm[0][0] - jm[1][1];
        assert!(gp < gm - 0.01 * (opt[0] + opt[1]), "{gp} vs {gm}");
        assert!((jm[0][0] / opt[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn random_profiles_do_not_beat_planar_optimum() {
        let g = TimeGrid::new(1.0, 500).unwrap();
        let x = ParameterPoint::uniform(vec![1.5, 1.0]).unwrap();
        let v = velocities(&TwoFrequencyField, &x.values, &g).unwrap();
        let frame = detect_plane(&v).unwrap();
        let q = g.weights();
        let s = planar_optimal_schedule(&TwoFrequencyField, &x, &g).unwrap();
        let best = planar_objective(&frame, &q, &s.spec().alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let alpha: Vec<f64> = g
                .times()
                .iter()
                .map(|t| c[0] * t + c[1] * t * t + c[2] * (3.0 * t).sin() + c[3] * (7.0 * t).cos())
                .collect();
            assert!(planar_objective(&frame, &q, &alpha) <= best + 1e-12);
        }
    }

    #[test]
    fn weight_rescaling_leaves_frames_unchanged() {
        let g = TimeGrid::new(1.5, 600).unwrap();
        let a = ParameterPoint::new(vec![1.5, 1.0], vec![1.0, 2.0]).unwrap();
        let b = ParameterPoint::new(vec![1.5, 1.0], vec![3.0, 6.0]).unwrap();
        let sa = planar_optimal_schedule(&TwoFrequencyField, &a, &g).unwrap();
        let sb = planar_optimal_schedule(&TwoFrequencyField, &b, &g).unwrap();
        for (ra, rb) in sa.frames().iter().zip(sb.frames()) {
            assert!((*ra - *rb).frobenius() < 1e-9, "{}", (*ra - *rb).frobenius());
        }
    }

    #[test]
    fn single_parameter_locks_reach_optimum() {
        let g = TimeGrid::new(1.0, 4000).unwrap();
        let x = ParameterPoint::uniform(vec![1.0, 2.0]).unwrap();
        for i in 0..2 {
            let s = single_param_schedule(&AcField, &x.values, &g, i).unwrap();
            let (j, opt) = j_of(&AcField, &x, &g, &s);
            let ratio = j[i][i] / opt[i];
            assert!(ratio <= 1.0 + 1e-9 && ratio >= 1.0 - 5.0 * g.dt() * g.dt(), "{ratio}");
        }
    }

    #[test]
    fn non_planar_single_parameter_uses_transport() {
        #[derive(Debug)]
        struct Helix;
        impl FieldModel for Helix {
            fn name(&self) -> &str {
                "helix"
            }
            fn n_params(&self) -> usize {
                1
            }
            fn field(&self, x: &[f64], t: f64) -> Vec3 {
                Vec3::new((2.0 * t).cos(), (2.0 * t).sin(), t).scale(x[0])
            }
            fn gradient(&self, _i: usize, _x: &[f64], t: f64) -> Vec3 {
                Vec3::new((2.0 * t).cos(), (2.0 * t).sin(), t)
            }
            fn formula(&self) -> String {
                "helix".into()
            }
            fn default_point(&self) -> Vec<f64> {
                vec![1.0]
            }
        }
        let g = TimeGrid::new(2.0, 2000).unwrap();
        let x = ParameterPoint::uniform(vec![1.0]).unwrap();
        let s = single_param_schedule(&Helix, &x.values, &g, 0).unwrap();
        assert!(s.consistency_residual() < 1e-8);
        let (j, opt) = j_of(&Helix, &x, &g, &s);
        assert!((j[0][0] / opt[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_velocity_is_rejected() {
        #[derive(Debug)]
        struct Flat;
        impl FieldModel for Flat {
            fn name(&self) -> &str {
                "flat"
            }
            fn n_params(&self) -> usize {
                1
            }
            fn field(&self, _x: &[f64], _t: f64) -> Vec3 {
                Vec3::X
            }
            fn gradient(&self, _i: usize, _x: &[f64], _t: f64) -> Vec3 {
                Vec3::ZERO
            }
            fn formula(&self) -> String {
                "flat".into()
            }
            fn default_point(&self) -> Vec<f64> {
                vec![0.0]
            }
        }
        let g = TimeGrid::new(1.0, 10).unwrap();
        assert!(matches!(single_param_schedule(&Flat, &[0.0], &g, 0), Err(Error::ZeroVelocity(_))));
        let x = ParameterPoint::uniform(vec![0.0]).unwrap();
        assert!(planar_optimal_schedule(&Flat, &x, &g).is_err());
    }
}
