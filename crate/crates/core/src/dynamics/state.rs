use crate::error::{Error, Result};
use crate::numerics::Mat2c;
use num_complex::Complex64;

/// Pure probe⊗ancilla state with amplitudes ordered
/// `|0p0a⟩, |0p1a⟩, |1p0a⟩, |1p1a⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    pub amplitudes: [Complex64; 4],
}

impl TwoQubitState {
    /// `(|0p0a⟩ + |1p1a⟩)/√2`.
    pub fn phi0() -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        TwoQubitState { amplitudes: [r, z, z, r] }
    }

    /// Normalizes `amplitudes`; rejects the zero vector and non-finite input.
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        if !amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::NonFinite("two-qubit amplitudes".into()));
        }
        let n = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        Ok(TwoQubitState { amplitudes: amplitudes.map(|a| a / n) })
    }

    pub fn product(probe: [Complex64; 2], ancilla: [Complex64; 2]) -> Result<Self> {
        TwoQubitState::new([probe[0] * ancilla[0], probe[0] * ancilla[1], probe[1] * ancilla[0], probe[1] * ancilla[1]])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &TwoQubitState) -> Complex64 {
        inner4(&self.amplitudes, &other.amplitudes)
    }

    /// `(op ⊗ I)|self⟩` without renormalization; `op` need not be unitary.
    pub fn apply_probe(&self, op: &Mat2c) -> [Complex64; 4] {
        let a = &self.amplitudes;
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for anc in 0..2 {
            let v = op.apply([a[anc], a[2 + anc]]);
            out[anc] = v[0];
            out[2 + anc] = v[1];
        }
        out
    }

    /// Applies a unitary `u ⊗ I` in place.
    pub fn evolve_probe(&mut self, u: &Mat2c) {
        self.amplitudes = self.apply_probe(u);
    }
}

pub(crate) fn inner4(a: &[Complex64; 4], b: &[Complex64; 4]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
