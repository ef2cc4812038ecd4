//! Control-enhanced multiparameter estimation on a single qubit probe
//! entangled with an ancilla.
//!
//! The crate simulates a qubit driven by `H = F(x, t)·σ`, accumulates the
//! Heisenberg-picture generators of each parameter as 3-vectors, and derives
//! the quantum Fisher information matrix, the gap functional
//! `𝒢 = Σ_i (J^opt_i − J_ii)` that measures control incompatibility, the
//! trace Cramér–Rao bound, and an SVD-based lower bound on `𝒢`. It also
//! synthesizes joint controls (time reversal, engineered DC/AC Hamiltonians,
//! the closed-form planar rotation profile) and checks them against a
//! Nelder–Mead brute-force search and finite-difference state derivatives.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod measurement;
pub mod numerics;
pub mod qfim;

pub use error::{Error, Result};
