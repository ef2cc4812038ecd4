//! Control synthesis: planar closed-form profiles, single-parameter locks,
//! the SVD lower bound, a Nelder–Mead oracle and stationarity checks.

mod bound;
mod brute;
pub mod nelder_mead;
mod planar;
mod plane;
mod stationarity;

pub use bound::{correlation_kernel, svd_lower_bound, CorrelationKernel};
pub use brute::{brute_force_optimize, BruteForceOptions, BruteForceResult, Objective};
pub use nelder_mead::NelderMead;
pub use planar::{
    pairwise_residual, pi_candidates, planar_alpha, planar_objective, planar_optimal_schedule, polish_alpha,
    single_param_schedule, AlphaProfile,
};
pub use plane::{detect_plane, PlanarFrame, PLANAR_RATIO};
pub use stationarity::{verify_stationarity, StationarityReport};
