//! Projective measurements on probe⊗ancilla, classical Fisher information,
//! and the optimality diagnostics of the entangled probe.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::state::inner4;
use crate::dynamics::{evolve_entangled, ControlSchedule, FieldModel, GeneratorVector, TimeGrid, TwoQubitState};
use crate::error::{Error, Result};
use crate::numerics::Mat2c;
use crate::qfim::{fd_step, MIN_FD_STEP};

/// Probability below which an outcome is treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Derivative magnitude above which a zero-probability outcome diverges.
pub const DIVERGENT_SLOPE: f64 = 1e-8;

/// Four orthonormal two-qubit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    pub name: String,
    pub vectors: [[Complex64; 4]; 4],
}

impl MeasurementBasis {
    pub fn new(name: impl Into<String>, vectors: [[Complex64; 4]; 4]) -> Result<Self> {
        for a in 0..4 {
            for b in 0..4 {
                let ip = inner4(&vectors[a], &vectors[b]);
                let expect = if a == b { 1.0 } else { 0.0 };
                if (ip - expect).norm() > 1e-12 {
                    return Err(Error::InvalidInput(format!("basis vectors {a} and {b} are not orthonormal")));
                }
            }
        }
        Ok(MeasurementBasis { name: name.into(), vectors })
    }

    /// `(U_A ⊗ U_B)` applied to each vector.
    pub fn locally_rotated(&self, ua: &Mat2c, ub: &Mat2c, name: impl Into<String>) -> Result<Self> {
        let vectors = self.vectors.map(|v| {
            let mut out = [Complex64::new(0.0, 0.0); 4];
            for p in 0..2 {
                for a in 0..2 {
                    for q in 0..2 {
                        for b in 0..2 {
                            out[2 * p + a] += ua.0[p][q] * ub.0[a][b] * v[2 * q + b];
                        }
                    }
                }
            }
            out
        });
        MeasurementBasis::new(name, vectors)
    }
}

/// `(|00⟩ ± |11⟩)/√2`, `(|01⟩ ± |10⟩)/√2`.
pub fn bell_basis() -> MeasurementBasis {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    MeasurementBasis { name: "bell".into(), vectors: [[r, z, z, r], [r, z, z, -r], [z, r, r, z], [z, r, -r, z]] }
}

pub fn outcome_probabilities(state: &TwoQubitState, basis: &MeasurementBasis) -> [f64; 4] {
    basis.vectors.map(|y| inner4(&y, &state.amplitudes).norm_sqr())
}

fn amplitudes(state: &TwoQubitState, basis: &MeasurementBasis) -> [Complex64; 4] {
    basis.vectors.map(|y| inner4(&y, &state.amplitudes))
}

/// Classical Fisher information of a projective measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfimReport {
    #[serde(rename = "I")]
    pub i: Vec<Vec<f64>>,
    pub basis: String,
    pub p: [f64; 4],
    /// Outcomes with vanishing probability but non-vanishing slope.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub divergent: Vec<usize>,
}

/// `I_ij = Σ_y ∂_i p_y ∂_j p_y / p_y` with central-difference derivatives.
///
/// Outcomes with `p_y < 1e-12` contribute their limit
/// `4 Re(∂_i ā_y ∂_j a_y)` when the slope of `p_y` also vanishes, where
/// `a_y = ⟨y|φ⟩`; they are flagged as divergent and skipped when it does not.
pub fn cfim(
    model: &dyn FieldModel,
    x: &[f64],
    grid: &TimeGrid,
    schedule: &ControlSchedule,
    basis: &MeasurementBasis,
    h: f64,
) -> Result<CfimReport> {
    if !(h.is_finite() && h >= MIN_FD_STEP) {
        return Err(Error::StepTooSmall(h));
    }
    let n = x.len();
    let center = evolve_entangled(model, x, grid, schedule)?;
    let p = outcome_probabilities(&center, basis);
    let mut dp = vec![[0.0; 4]; n];
    let mut da = vec![[Complex64::new(0.0, 0.0); 4]; n];
    for i in 0..n {
        let hi = fd_step(h, x[i]);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += hi;
        xm[i] -= hi;
        let ap = amplitudes(&evolve_entangled(model, &xp, grid, schedule)?, basis);
        let am = amplitudes(&evolve_entangled(model, &xm, grid, schedule)?, basis);
        for y in 0..4 {
            dp[i][y] = (ap[y].norm_sqr() - am[y].norm_sqr()) / (2.0 * hi);
            da[i][y] = (ap[y] - am[y]) / (2.0 * hi);
        }
    }
    let mut info = vec![vec![0.0; n]; n];
    let mut divergent = Vec::new();
    for y in 0..4 {
        if p[y] >= ZERO_PROBABILITY {
            for a in 0..n {
                for b in 0..n {
                    info[a][b] += dp[a][y] * dp[b][y] / p[y];
                }
            }
        } else if (0..n).any(|i| dp[i][y].abs() > DIVERGENT_SLOPE) {
            divergent.push(y);
        } else {
            for a in 0..n {
                for b in 0..n {
                    info[a][b] += 4.0 * (da[a][y].conj() * da[b][y]).re;
                }
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            let s = 0.5 * (info[a][b] + info[b][a]);
            info[a][b] = s;
            info[b][a] = s;
        }
    }
    Ok(CfimReport { i: info, basis: basis.name.clone(), p, divergent })
}

/// `Im⟨ψ|S_i S_j|ψ⟩` computed directly on the two-qubit state.
pub fn weak_commutation_on(gens: &[GeneratorVector], state: &TwoQubitState) -> Vec<Vec<f64>> {
    let applied: Vec<[Complex64; 4]> = gens.iter().map(|g| state.apply_probe(&g.operator())).collect();
    // ⟨ψ|S_i S_j|ψ⟩ = ⟨S_i ψ|S_j ψ⟩ since S_i is Hermitian
    applied.iter().map(|a| applied.iter().map(|b| inner4(a, b).im).collect()).collect()
}

/// Weak-commutation matrix on the maximally entangled probe.
pub fn weak_commutation(gens: &[GeneratorVector]) -> Vec<Vec<f64>> {
    weak_commutation_on(gens, &TwoQubitState::phi0())
}

/// `⟨S²⟩ − ⟨S⟩²` for `S = s·σ ⊗ I`.
pub fn probe_variance(gen: &GeneratorVector, state: &TwoQubitState) -> f64 {
    let sv = state.apply_probe(&gen.operator());
    let mean = inner4(&state.amplitudes, &sv).re;
    inner4(&sv, &sv).re - mean * mean
}
