use serde::{Deserialize, Serialize};

use super::{evaluate, evaluate_schedule, Scenario, STATIONARITY_PERTURBATION};
use crate::control::verify_stationarity;
use crate::dynamics::{build_schedule, ControlSchedule, ScheduleKind, TimeGrid};
use crate::error::Result;
use crate::measurement::{bell_basis, cfim, weak_commutation};
use crate::numerics::sym_eigen;
use crate::qfim::qfim_from_state;

/// Largest admissible `max|F|·dt`.
pub const GRID_RESOLUTION: f64 = 1e-2;
pub const REFINEMENT_TOL: f64 = 1e-4;
pub const BOUND_TOL: f64 = 1e-6;
pub const CFIM_TOL: f64 = 1e-6;
pub const WEAK_COMMUTATION_TOL: f64 = 1e-12;
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    fn at_most(name: &str, value: f64, tolerance: f64) -> Check {
        Check { name: name.into(), passed: value <= tolerance, value, tolerance, detail: None }
    }

    fn with_detail(mut self, detail: String) -> Check {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub control: String,
    pub steps: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    pub checks: Vec<Check>,
}

/// Runs the cross-method battery on the configured control. Every check is
/// evaluated; `first_failure` names the earliest one that failed.
pub fn verify(s: &Scenario) -> Result<VerifyReport> {
    let model = s.model.as_ref();
    let x = &s.point;
    let grid = &s.grid;
    let eval = evaluate(model, x, grid, &s.control)?;
    let j = &eval.report.j;
    let n = j.len();
    let mut checks = Vec::new();

    let fmax = (0..grid.steps()).map(|k| model.field(&x.values, grid.midpoint(k)).norm()).fold(0.0, f64::max);
    checks.push(
        Check::at_most("grid_resolution", fmax * grid.dt(), GRID_RESOLUTION)
            .with_detail(format!("max|F| = {fmax}, dt = {}", grid.dt())),
    );

    let fine = TimeGrid::new(grid.t_max(), 2 * grid.steps())?;
    let refined = refine(&eval.schedule, s, &fine)?;
    let jf = evaluate_schedule(model, x, &fine, refined)?.report.j;
    let scale = j.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let drift = max_abs_diff(j, &jf) / scale;
    checks.push(Check::at_most("refinement", drift, REFINEMENT_TOL).with_detail(format!(
        "relative change of J between {} and {} steps",
        grid.steps(),
        fine.steps()
    )));

    let js = qfim_from_state(model, &x.values, grid, &eval.schedule, s.fd_step)?;
    let tol = (1e-4_f64).max(10.0 * s.fd_step * s.fd_step);
    checks.push(Check::at_most("generator_vs_state", max_abs_diff(j, &js), tol));

    let norm = sym_eigen(j).values.first().copied().unwrap_or(0.0).abs();
    let min_eig = sym_eigen(j).values.last().copied().unwrap_or(0.0);
    checks.push(Check::at_most("qfim_psd", -min_eig, 1e-9 * norm.max(1.0)));

    let over = (0..n).map(|i| j[i][i] - eval.report.j_opt[i]).fold(f64::NEG_INFINITY, f64::max);
    let opt_scale = eval.report.j_opt.iter().fold(1.0_f64, |m, v| m.max(*v));
    checks.push(
        Check::at_most("single_param_bound", over, 1e-9 * opt_scale).with_detail("max_i (J_ii − J^opt_i)".into()),
    );

    let r = &eval.report;
    checks.push(
        Check::at_most("bound_dominance", r.svd_lower_bound - r.weighted_gap, BOUND_TOL)
            .with_detail(format!("weighted gap {}, SVD bound {}", r.weighted_gap, r.svd_lower_bound)),
    );

    if matches!(s.control, ScheduleKind::PlanarOptimal) {
        let st = verify_stationarity(model, x, grid, &eval.schedule, STATIONARITY_PERTURBATION)?;
        checks.push(Check::at_most("stationarity", st.first_order_residual, st.threshold));
    }

    let cf = cfim(model, &x.values, grid, &eval.schedule, &bell_basis(), s.fd_step)?;
    let diff: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| js[a][b] - cf.i[a][b]).collect()).collect();
    let worst = -sym_eigen(&diff).values.last().copied().unwrap_or(0.0);
    let mut c = Check::at_most("cfim_dominated", worst, CFIM_TOL * norm.max(1.0));
    if !cf.divergent.is_empty() {
        c.passed = false;
        c = c.with_detail(format!("divergent outcomes {:?}", cf.divergent));
    }
    checks.push(c);

    let wc = weak_commutation(&eval.generators).iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    checks.push(Check::at_most("weak_commutation", wc, WEAK_COMMUTATION_TOL));

    checks.push(Check::at_most("schedule_consistency", eval.schedule.consistency_residual(), CONSISTENCY_TOL));

    let first_failure = checks.iter().find(|c| !c.passed).map(|c| c.name.clone());
    Ok(VerifyReport {
        scenario: s.name.clone(),
        control: s.control.label(),
        steps: grid.steps(),
        passed: first_failure.is_none(),
        first_failure,
        checks,
    })
}

/// The same control on a finer grid: segment angles are reused as is,
/// everything else is rebuilt from its kind.
fn refine(schedule: &ControlSchedule, s: &Scenario, fine: &TimeGrid) -> Result<ControlSchedule> {
    let spec = schedule.spec();
    if spec.segments.is_empty() {
        build_schedule(&spec.kind, s.model.as_ref(), &s.point, fine)
    } else {
        ControlSchedule::from_spec(spec, s.model.as_ref(), &s.point, fine)
    }
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}
