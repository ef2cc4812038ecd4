//! Control schedules: Heisenberg frame rotations `R(t_k)` together with the
//! per-step control unitaries that realize them.
//!
//! The controlled propagator `W_k` maps the initial state to the state at
//! `t_k` and the frame is `R(t_k) = SO3(W_k†)`, so that a velocity `V` at
//! time `t` enters the generator as `R(t)·V`. On step `k` the state is
//! advanced by `H_k(x) K_k H_k(x)` where `H_k(x) = exp(−i F(x, t_mid)·σ dt/2)`
//! is half of the free evolution and `K_k` is the control kick stored in
//! [`ControlSchedule::step_unitaries`]. At the nominal parameters the product
//! equals `W_{k+1} W_k†`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::evolve::propagate_free;
use crate::dynamics::grid::{ParameterPoint, TimeGrid};
use crate::dynamics::model::FieldModel;
use crate::error::{Error, Result};
use crate::numerics::{so3_from_su2, su2_exp, su2_rotation, Mat2c, Mat3, Vec3};

pub const MAX_SEGMENTS: usize = 64;

/// Which control strategy produced (or should produce) a schedule.
///
/// The textual label form is used in configs, CSV output and JSON:
/// `none`, `time_reversal`, `dc`, `ac`, `ac(2.5)`, `planar_optimal`,
/// `single_param(x_m)` or `single_param(0)`, `brute_force(32,8,7)`, `custom`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScheduleKind {
    None,
    TimeReversal,
    Dc,
    /// Rotating frame at `omega`; `None` takes the model's drive frequency.
    Ac {
        omega: Option<f64>,
    },
    PlanarOptimal,
    /// Lock the velocity of one parameter, given by name or 0-based index.
    SingleParam {
        param: String,
    },
    BruteForce {
        segments: usize,
        restarts: usize,
        seed: u64,
    },
    Custom,
}

impl ScheduleKind {
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleKind::None => f.write_str("none"),
            ScheduleKind::TimeReversal => f.write_str("time_reversal"),
            ScheduleKind::Dc => f.write_str("dc"),
            ScheduleKind::Ac { omega: None } => f.write_str("ac"),
            ScheduleKind::Ac { omega: Some(w) } => write!(f, "ac({w})"),
            ScheduleKind::PlanarOptimal => f.write_str("planar_optimal"),
            ScheduleKind::SingleParam { param } => write!(f, "single_param({param})"),
            ScheduleKind::BruteForce { segments, restarts, seed } => {
                write!(f, "brute_force({segments},{restarts},{seed})")
            }
            ScheduleKind::Custom => f.write_str("custom"),
        }
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Config(format!("control `{s}`: {msg}"));
        let s_trim = s.trim();
        let (name, args) = match s_trim.find('(') {
            Some(open) => {
                let rest = &s_trim[open + 1..];
                let inner = rest.strip_suffix(')').ok_or_else(|| bad("missing closing parenthesis"))?;
                if inner.contains('(') || inner.contains(')') {
                    return Err(bad("nested parentheses"));
                }
                (s_trim[..open].trim(), Some(inner))
            }
            None => (s_trim, None),
        };
        let list: Vec<&str> = args.map(|a| a.split(',').map(str::trim).collect()).unwrap_or_default();
        let no_args = |kind: ScheduleKind| {
            if args.is_some() {
                Err(bad("takes no arguments"))
            } else {
                Ok(kind)
            }
        };
        match name {
            "none" => no_args(ScheduleKind::None),
            "time_reversal" => no_args(ScheduleKind::TimeReversal),
            "dc" => no_args(ScheduleKind::Dc),
            "planar_optimal" => no_args(ScheduleKind::PlanarOptimal),
            "custom" => no_args(ScheduleKind::Custom),
            "ac" => match list.as_slice() {
                [] => Ok(ScheduleKind::Ac { omega: None }),
                [w] => {
                    let w: f64 = w.parse().map_err(|_| bad("frequency is not a number"))?;
                    if !w.is_finite() {
                        return Err(bad("frequency must be finite"));
                    }
                    Ok(ScheduleKind::Ac { omega: Some(w) })
                }
                _ => Err(bad("expected ac or ac(omega)")),
            },
            "single_param" => match list.as_slice() {
                [p] if !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
                    Ok(ScheduleKind::SingleParam { param: p.to_string() })
                }
                _ => Err(bad("expected single_param(<index or name>)")),
            },
            "brute_force" => match list.as_slice() {
                [a, b, c] => {
                    let segments: usize = a.parse().map_err(|_| bad("segments must be an integer"))?;
                    let restarts: usize = b.parse().map_err(|_| bad("restarts must be an integer"))?;
                    let seed: u64 = c.parse().map_err(|_| bad("seed must be an unsigned integer"))?;
                    if segments == 0 || segments > MAX_SEGMENTS {
                        return Err(bad("segments must be in 1..=64"));
                    }
                    if restarts == 0 {
                        return Err(bad("restarts must be positive"));
                    }
                    Ok(ScheduleKind::BruteForce { segments, restarts, seed })
                }
                _ => Err(bad("expected brute_force(segments,restarts,seed)")),
            },
            _ => Err(bad("unknown control kind")),
        }
    }
}

impl TryFrom<String> for ScheduleKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ScheduleKind> for String {
    fn from(k: ScheduleKind) -> String {
        k.to_string()
    }
}

/// Serializable description of a schedule, sufficient to rebuild it exactly
/// for the same model, parameters and grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    /// Per-node rotation angle about `normal`.
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub normal: Option<[f64; 3]>,
    /// Per-segment angles: `[α]` about `normal`, or Z-Y-Z Euler triples.
    #[serde(default)]
    pub segments: Vec<Vec<f64>>,
}

impl ScheduleSpec {
    pub fn from_kind(kind: ScheduleKind) -> Self {
        ScheduleSpec { kind, alpha: Vec::new(), normal: None, segments: Vec::new() }
    }
}

/// A control schedule on a fixed grid.
#[derive(Debug, Clone)]
pub struct ControlSchedule {
    spec: ScheduleSpec,
    frames: Vec<Mat3>,
    net: Vec<Mat2c>,
    kicks: Vec<Mat2c>,
    half_free: Vec<Mat2c>,
}

impl ControlSchedule {
    /// Builds the schedule whose net controlled propagators at the nodes are `net`.
    pub fn from_net_propagators(
        spec: ScheduleSpec,
        model: &dyn FieldModel,
        x0: &[f64],
        grid: &TimeGrid,
        net: Vec<Mat2c>,
    ) -> Result<Self> {
        if net.len() != grid.nodes() {
            return Err(Error::Dimension(format!(
                "{} net propagators for a grid with {} nodes",
                net.len(),
                grid.nodes()
            )));
        }
        let frames = net.iter().map(|w| so3_from_su2(&w.dagger())).collect::<Result<Vec<_>>>()?;
        if (frames[0] - Mat3::IDENTITY).frobenius() > 1e-10 {
            return Err(Error::InvalidInput("schedule must start from the identity frame".into()));
        }
        let dt = grid.dt();
        let half_free: Vec<Mat2c> =
            (0..grid.steps()).map(|k| su2_exp(model.field(x0, grid.midpoint(k)), 0.5 * dt)).collect();
        let kicks = (0..grid.steps())
            .map(|k| {
                let ua = net[k + 1] * net[k].dagger();
                let h = half_free[k].dagger();
                h * ua * h
            })
            .collect();
        Ok(ControlSchedule { spec, frames, net, kicks, half_free })
    }

    /// `R(t_k) = Rot(normal, α_k)`; `alpha` must start at 0.
    pub fn from_planar_profile(
        kind: ScheduleKind,
        normal: Vec3,
        alpha: Vec<f64>,
        model: &dyn FieldModel,
        x0: &[f64],
        grid: &TimeGrid,
    ) -> Result<Self> {
        if alpha.len() != grid.nodes() {
            return Err(Error::Dimension(format!(
                "alpha profile has {} entries for {} nodes",
                alpha.len(),
                grid.nodes()
            )));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("alpha profile".into()));
        }
        let n = normal.normalized().ok_or_else(|| Error::InvalidInput("zero rotation axis".into()))?;
        let net = alpha.iter().map(|&a| su2_rotation(n, a).dagger()).collect();
        let spec = ScheduleSpec { kind, alpha, normal: Some(n.to_array()), segments: Vec::new() };
        ControlSchedule::from_net_propagators(spec, model, x0, grid, net)
    }

    /// Piecewise-constant frames. With `normal`, each segment is `[α]`, a
    /// rotation about `normal`; without, `[a, b, c]` giving `Z(a)·Y(b)·Z(c)`.
    /// Frames are expressed relative to the first segment so that `R(0) = I`.
    pub fn from_segments(
        kind: ScheduleKind,
        normal: Option<Vec3>,
        segments: Vec<Vec<f64>>,
        model: &dyn FieldModel,
        x0: &[f64],
        grid: &TimeGrid,
    ) -> Result<Self> {
        let count = segments.len();
        if count == 0 || count > MAX_SEGMENTS {
            return Err(Error::InvalidInput(format!("segment count must be in 1..=64, got {count}")));
        }
        let normal = match normal {
            Some(n) => Some(n.normalized().ok_or_else(|| Error::InvalidInput("zero rotation axis".into()))?),
            None => None,
        };
        let lifts = segments
            .iter()
            .map(|seg| {
                if seg.iter().any(|a| !a.is_finite()) {
                    return Err(Error::NonFinite("segment angles".into()));
                }
                match (normal, seg.as_slice()) {
                    (Some(n), [a]) => Ok(su2_rotation(n, *a)),
                    (None, [a, b, c]) => {
                        Ok(su2_rotation(Vec3::Z, *a) * su2_rotation(Vec3::Y, *b) * su2_rotation(Vec3::Z, *c))
                    }
                    _ => Err(Error::InvalidInput(format!(
                        "segment has {} angles; expected 1 with a normal or 3 without",
                        seg.len()
                    ))),
                }
            })
            .collect::<Result<Vec<Mat2c>>>()?;
        let q0 = lifts[0];
        let net = (0..grid.nodes()).map(|k| (q0.dagger() * lifts[grid.segment_of(k, count)]).dagger()).collect();
        let spec = ScheduleSpec { kind, alpha: Vec::new(), normal: normal.map(Vec3::to_array), segments };
        ControlSchedule::from_net_propagators(spec, model, x0, grid, net)
    }

    /// Rebuilds a schedule from its serialized description.
    pub fn from_spec(spec: &ScheduleSpec, model: &dyn FieldModel, x: &ParameterPoint, grid: &TimeGrid) -> Result<Self> {
        let normal = spec.normal.map(Vec3::from_array);
        if !spec.alpha.is_empty() {
            let n = normal.ok_or_else(|| Error::InvalidInput("alpha profile requires a normal".into()))?;
            ControlSchedule::from_planar_profile(spec.kind.clone(), n, spec.alpha.clone(), model, &x.values, grid)
        } else if !spec.segments.is_empty() {
            ControlSchedule::from_segments(spec.kind.clone(), normal, spec.segments.clone(), model, &x.values, grid)
        } else {
            build_schedule(&spec.kind, model, x, grid)
        }
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.spec.kind
    }

    pub fn spec(&self) -> &ScheduleSpec {
        &self.spec
    }

    pub fn steps(&self) -> usize {
        self.kicks.len()
    }

    /// `R(t_k)` for `k = 0..=steps`.
    pub fn frames(&self) -> &[Mat3] {
        &self.frames
    }

    /// Net controlled propagators `W_k` at the nodes.
    pub fn net_propagators(&self) -> &[Mat2c] {
        &self.net
    }

    /// Control kicks `K_k`, one per step.
    pub fn step_unitaries(&self) -> &[Mat2c] {
        &self.kicks
    }

    /// Full controlled step `H_k K_k H_k` at the nominal parameters.
    pub fn nominal_step(&self, k: usize) -> Mat2c {
        self.half_free[k] * self.kicks[k] * self.half_free[k]
    }

    /// Largest Frobenius distance between the stored frames and the frames
    /// reconstructed by chaining the step unitaries.
    pub fn consistency_residual(&self) -> f64 {
        let mut w = Mat2c::IDENTITY;
        let mut worst = (self.frames[0] - Mat3::IDENTITY).frobenius();
        for k in 0..self.steps() {
            w = self.nominal_step(k) * w;
            let r = so3_from_su2(&w.dagger()).map(|r| (r - self.frames[k + 1]).frobenius());
            worst = worst.max(r.unwrap_or(f64::INFINITY));
        }
        worst
    }
}

/// Resolves a parameter given by 0-based index or by model parameter name.
pub fn resolve_param(model: &dyn FieldModel, param: &str) -> Result<usize> {
    let idx = match param.parse::<usize>() {
        Ok(i) => Some(i),
        Err(_) => model.param_names().iter().position(|n| n == param),
    };
    match idx {
        Some(i) if i < model.n_params() => Ok(i),
        _ => Err(Error::Config(format!(
            "unknown parameter `{param}` for model {} (parameters: {})",
            model.name(),
            model.param_names().join(", ")
        ))),
    }
}

/// Constructs the schedule of the given kind.
pub fn build_schedule(
    kind: &ScheduleKind,
    model: &dyn FieldModel,
    x: &ParameterPoint,
    grid: &TimeGrid,
) -> Result<ControlSchedule> {
    if x.len() != model.n_params() {
        return Err(Error::Dimension(format!(
            "model {} has {} parameters, point has {}",
            model.name(),
            model.n_params(),
            x.len()
        )));
    }
    let x0 = &x.values;
    let spec = ScheduleSpec::from_kind(kind.clone());
    match kind {
        ScheduleKind::None => {
            let net = propagate_free(model, x0, grid);
            ControlSchedule::from_net_propagators(spec, model, x0, grid, net)
        }
        ScheduleKind::TimeReversal | ScheduleKind::Dc => {
            ControlSchedule::from_net_propagators(spec, model, x0, grid, vec![Mat2c::IDENTITY; grid.nodes()])
        }
        ScheduleKind::Ac { omega } => {
            let w = match omega {
                Some(w) => *w,
                None => model.drive_frequency(x0).ok_or_else(|| {
                    Error::Config(format!("model {} has no drive frequency; use ac(<omega>)", model.name()))
                })?,
            };
            let net = (0..grid.nodes()).map(|k| su2_rotation(Vec3::Y, w * grid.time(k)).dagger()).collect();
            ControlSchedule::from_net_propagators(spec, model, x0, grid, net)
        }
        ScheduleKind::PlanarOptimal => crate::control::planar_optimal_schedule(model, x, grid),
        ScheduleKind::SingleParam { param } => {
            let i = resolve_param(model, param)?;
            crate::control::single_param_schedule(model, x0, grid, i)
        }
        ScheduleKind::BruteForce { segments, restarts, seed } => {
            let opts = crate::control::BruteForceOptions::new(*segments, *restarts, *seed);
            Ok(crate::control::brute_force_optimize(model, x, grid, &opts)?.schedule)
        }
        ScheduleKind::Custom => {
            Err(Error::Config("custom schedules are built from explicit frames, not by kind".into()))
        }
    }
}
