//! Config-driven runs: single evaluations, `t_max` sweeps and the
//! verification battery used by the command-line driver.

mod config;
mod sweep;
mod verify;

pub use config::{CustomModel, GridConfig, Scenario, ScenarioConfig, DEFAULT_FD_STEP, STEPS_PER_UNIT_TIME};
pub use sweep::{
    default_sweep, parse_sweep_csv, parse_sweep_row, sweep, sweep_csv, sweep_header, write_atomic, write_sweep_csv,
    SweepRow,
};
pub use verify::{verify, Check, VerifyReport};

use serde::{Deserialize, Serialize};

use crate::control::{detect_plane, pairwise_residual, svd_lower_bound, verify_stationarity, StationarityReport};
use crate::dynamics::{
    build_schedule, builtin_model, generators, velocities, ControlSchedule, FieldModel, GeneratorVector,
    ParameterPoint, ScheduleKind, ScheduleSpec, TimeGrid, BUILTIN_MODELS,
};
use crate::error::Result;
use crate::measurement::{bell_basis, cfim, weak_commutation, CfimReport};
use crate::numerics::Vec3;
use crate::qfim::{is_diagonal, minimal_gap_planar_weighted, qfim_from_generators, single_param_optima, QfimReport};

/// Relative size below which off-diagonal QFIM entries count as zero.
pub const DIAGONAL_TOL: f64 = 1e-6;

/// Perturbation amplitude for the stationarity probe.
pub const STATIONARITY_PERTURBATION: f64 = 1e-3;

const PAIRWISE_SAMPLES: usize = 256;
const PAIRWISE_SEED: u64 = 0x7a1f;

/// Schedule, generators and QFIM summary for one control on one grid.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub schedule: ControlSchedule,
    pub velocities: Vec<Vec<Vec3>>,
    pub generators: Vec<GeneratorVector>,
    pub report: QfimReport,
}

pub fn evaluate(
    model: &dyn FieldModel,
    x: &ParameterPoint,
    grid: &TimeGrid,
    kind: &ScheduleKind,
) -> Result<Evaluation> {
    let schedule = build_schedule(kind, model, x, grid)?;
    evaluate_schedule(model, x, grid, schedule)
}

pub fn evaluate_schedule(
    model: &dyn FieldModel,
    x: &ParameterPoint,
    grid: &TimeGrid,
    schedule: ControlSchedule,
) -> Result<Evaluation> {
    let vel = velocities(model, &x.values, grid)?;
    let lb = svd_lower_bound(&vel, grid, &x.weights)?;
    finish(vel, lb, x, grid, schedule)
}

/// Evaluates several controls on one grid, sharing the control-independent
/// work (velocities, optima, SVD bound).
pub fn evaluate_all(
    model: &dyn FieldModel,
    x: &ParameterPoint,
    grid: &TimeGrid,
    kinds: &[ScheduleKind],
) -> Result<Vec<Evaluation>> {
    let vel = velocities(model, &x.values, grid)?;
    let lb = svd_lower_bound(&vel, grid, &x.weights)?;
    kinds.iter().map(|k| finish(vel.clone(), lb, x, grid, build_schedule(k, model, x, grid)?)).collect()
}

fn finish(
    vel: Vec<Vec<Vec3>>,
    lb: f64,
    x: &ParameterPoint,
    grid: &TimeGrid,
    schedule: ControlSchedule,
) -> Result<Evaluation> {
    let gens = generators(&vel, &schedule, grid)?;
    let j = qfim_from_generators(&gens);
    let j_opt = single_param_optima(&vel, grid)?;
    let report = QfimReport::new(j, j_opt, &x.weights, lb)?;
    Ok(Evaluation { schedule, velocities: vel, generators: gens, report })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub j_is_diagonal: bool,
    /// Closed-form minimum of the weighted gap, for planar velocity sets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_gap_planar: Option<f64>,
    /// Largest pairwise phase mismatch of a planar rotation profile.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairwise_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationarity: Option<StationarityReport>,
    /// Largest `|Im⟨φ₀|S_i S_j|φ₀⟩|`.
    pub weak_commutation: f64,
    pub schedule_consistency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub control: String,
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    pub t_max: f64,
    pub steps: usize,
    pub qfim: QfimReport,
    pub cfim: CfimReport,
    pub diagnostics: Diagnostics,
    pub schedule: ScheduleSpec,
}

/// Evaluates the configured control at the configured `t_max`.
pub fn run(s: &Scenario) -> Result<RunReport> {
    let eval = evaluate(s.model.as_ref(), &s.point, &s.grid, &s.control)?;
    let cf = cfim(s.model.as_ref(), &s.point.values, &s.grid, &eval.schedule, &bell_basis(), s.fd_step)?;
    let diagnostics = diagnostics(s, &eval)?;
    Ok(RunReport {
        scenario: s.name.clone(),
        control: s.control.label(),
        x: s.point.values.clone(),
        weights: s.point.weights.clone(),
        t_max: s.grid.t_max(),
        steps: s.grid.steps(),
        qfim: eval.report,
        cfim: cf,
        diagnostics,
        schedule: eval.schedule.spec().clone(),
    })
}

fn diagnostics(s: &Scenario, eval: &Evaluation) -> Result<Diagnostics> {
    let plane = detect_plane(&eval.velocities).and_then(|f| f.scaled(&s.point.weights)).ok();
    let minimal_gap_planar = match plane {
        Some(_) => Some(minimal_gap_planar_weighted(&eval.velocities, &s.grid, &s.point.weights)?),
        None => None,
    };
    let alpha = &eval.schedule.spec().alpha;
    let pairwise = match &plane {
        Some(frame) if alpha.len() == s.grid.nodes() => {
            Some(pairwise_residual(frame, alpha, PAIRWISE_SAMPLES, PAIRWISE_SEED))
        }
        _ => None,
    };
    let stationarity = if matches!(s.control, ScheduleKind::PlanarOptimal) {
        Some(verify_stationarity(s.model.as_ref(), &s.point, &s.grid, &eval.schedule, STATIONARITY_PERTURBATION)?)
    } else {
        None
    };
    let wc = weak_commutation(&eval.generators).iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(Diagnostics {
        j_is_diagonal: is_diagonal(&eval.report.j, DIAGONAL_TOL),
        minimal_gap_planar,
        pairwise_residual: pairwise,
        stationarity,
        weak_commutation: wc,
        schedule_consistency: eval.schedule.consistency_residual(),
    })
}

/// One line per built-in scenario: name, parameters and field.
pub fn scenario_listing() -> Vec<String> {
    BUILTIN_MODELS
        .iter()
        .filter_map(|name| builtin_model(name))
        .map(|m| format!("{}\t{}\t{}", m.name(), m.param_names().join(","), m.formula()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(text: &str) -> Scenario {
        ScenarioConfig::from_json(text).unwrap().validate().unwrap()
    }

    #[test]
    fn run_two_frequency_planar() {
        let s = scenario(r#"{"scenario":"two_frequency","grid":{"t_max":1.0},"control":"planar_optimal"}"#);
        let r = run(&s).unwrap();
        assert!((r.qfim.gap - 0.16704).abs() < 1e-4, "{}", r.qfim.gap);
        let d = &r.diagnostics;
        assert!((d.minimal_gap_planar.unwrap() - r.qfim.gap).abs() < 1e-6);
        assert!(d.stationarity.unwrap().passed);
        assert!(d.weak_commutation < 1e-12);
        assert_eq!(r.schedule.alpha.len(), 4001);
        let text = serde_json::to_string(&r).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn run_dc_is_optimal() {
        let s = scenario(r#"{"scenario":"dc","grid":{"t_max":1.0,"steps":400},"control":"dc"}"#);
        let r = run(&s).unwrap();
        assert!(r.qfim.gap.abs() < 1e-9);
        assert!(r.diagnostics.j_is_diagonal);
        assert!(r.cfim.divergent.is_empty());
        for a in 0..2 {
            for b in 0..2 {
                assert!((r.cfim.i[a][b] - r.qfim.j[a][b]).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn listing_has_builtins() {
        let l = scenario_listing();
        assert_eq!(l.len(), 3);
        assert!(l.iter().any(|s| s.starts_with("two_frequency\tx_m,x_n")));
    }
}
