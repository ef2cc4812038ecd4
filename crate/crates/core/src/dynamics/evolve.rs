use serde::{Deserialize, Serialize};

use crate::dynamics::grid::TimeGrid;
use crate::dynamics::model::FieldModel;
use crate::dynamics::schedule::ControlSchedule;
use crate::dynamics::state::TwoQubitState;
use crate::error::{Error, Result};
use crate::numerics::{su2_exp, Mat2c, Vec3};

/// Heisenberg-picture generator `S_i = s·σ` of one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorVector {
    pub s: Vec3,
    pub param_index: usize,
}

impl GeneratorVector {
    pub fn operator(&self) -> Mat2c {
        Mat2c::pauli_dot(self.s)
    }
}

/// `V[i][k] = ∂F/∂x_i` at node `t_k`.
pub fn velocities(model: &dyn FieldModel, x: &[f64], grid: &TimeGrid) -> Result<Vec<Vec<Vec3>>> {
    if x.len() != model.n_params() {
        return Err(Error::Dimension(format!(
            "model {} has {} parameters, got {}",
            model.name(),
            model.n_params(),
            x.len()
        )));
    }
    (0..model.n_params())
        .map(|i| {
            (0..grid.nodes())
                .map(|k| {
                    let v = model.gradient(i, x, grid.time(k));
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::NonFinite(format!("velocity of parameter {i} at t = {}", grid.time(k))))
                    }
                })
                .collect()
        })
        .collect()
}

/// Free propagators `U[k]` from 0 to `t_k`, midpoint rule.
pub fn propagate_free(model: &dyn FieldModel, x: &[f64], grid: &TimeGrid) -> Vec<Mat2c> {
    let dt = grid.dt();
    let mut out = Vec::with_capacity(grid.nodes());
    let mut u = Mat2c::IDENTITY;
    out.push(u);
    for k in 0..grid.steps() {
        u = su2_exp(model.field(x, grid.midpoint(k)), dt) * u;
        out.push(u);
    }
    out
}

fn check_schedule(schedule: &ControlSchedule, grid: &TimeGrid) -> Result<()> {
    if schedule.steps() != grid.steps() {
        return Err(Error::Dimension(format!("schedule has {} steps, grid has {}", schedule.steps(), grid.steps())));
    }
    Ok(())
}

/// `s_i = ∫ R(t)·V_i(t) dt`, trapezoid over the nodes.
pub fn generator(
    velocities: &[Vec<Vec3>],
    schedule: &ControlSchedule,
    grid: &TimeGrid,
    i: usize,
) -> Result<GeneratorVector> {
    check_schedule(schedule, grid)?;
    let v = velocities.get(i).ok_or_else(|| Error::Dimension(format!("no velocity for parameter {i}")))?;
    if v.len() != grid.nodes() {
        return Err(Error::Dimension(format!("velocity has {} nodes, grid has {}", v.len(), grid.nodes())));
    }
    let w = grid.weights();
    let s = schedule.frames().iter().zip(v).zip(&w).fold(Vec3::ZERO, |acc, ((r, v), w)| acc + r.mul_vec(*v).scale(*w));
    Ok(GeneratorVector { s, param_index: i })
}

pub fn generators(
    velocities: &[Vec<Vec3>],
    schedule: &ControlSchedule,
    grid: &TimeGrid,
) -> Result<Vec<GeneratorVector>> {
    (0..velocities.len()).map(|i| generator(velocities, schedule, grid, i)).collect()
}

/// Evolves `|φ₀⟩` under the controlled dynamics at parameters `x`.
///
/// The schedule's kicks are held fixed, so derivatives of the result with
/// respect to `x` probe only the parameter-encoding field.
pub fn evolve_entangled(
    model: &dyn FieldModel,
    x: &[f64],
    grid: &TimeGrid,
    schedule: &ControlSchedule,
) -> Result<TwoQubitState> {
    check_schedule(schedule, grid)?;
    if x.len() != model.n_params() {
        return Err(Error::Dimension(format!("expected {} parameters, got {}", model.n_params(), x.len())));
    }
    let dt = grid.dt();
    let mut state = TwoQubitState::phi0();
    for (k, kick) in schedule.step_unitaries().iter().enumerate() {
        let h = su2_exp(model.field(x, grid.midpoint(k)), 0.5 * dt);
        state.evolve_probe(&(h * *kick * h));
    }
    if !state.amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
        return Err(Error::NonFinite("evolved state".into()));
    }
    Ok(state)
}
