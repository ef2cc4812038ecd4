//! Field models, time grids, controlled propagation and Heisenberg generators.

pub mod evolve;
pub mod grid;
pub mod model;
pub mod schedule;
pub mod state;

pub use evolve::{evolve_entangled, generator, generators, propagate_free, velocities, GeneratorVector};
pub use grid::{validate_weights, ParameterPoint, TimeGrid};
pub use model::{
    builtin_model, AcField, Coefficient, DcField, FieldModel, HarmonicField, HarmonicTerm, TwoFrequencyField, Waveform,
    BUILTIN_MODELS,
};
pub use schedule::{build_schedule, resolve_param, ControlSchedule, ScheduleKind, ScheduleSpec, MAX_SEGMENTS};
pub use state::TwoQubitState;
