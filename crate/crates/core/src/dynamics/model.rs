//! Parameter-encoding field models `H = F(x, t)·σ`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Vec3;

/// A vector field `F(x, t)` in rad/s together with its parameter gradients.
///
/// Implementations must be re-entrant: evaluation may happen concurrently
/// from many threads.
pub trait FieldModel: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn n_params(&self) -> usize;

    fn param_names(&self) -> Vec<String> {
        (0..self.n_params()).map(|i| format!("x{}", i + 1)).collect()
    }

    fn field(&self, x: &[f64], t: f64) -> Vec3;

    /// `∂F/∂x_i` at `(x, t)`.
    fn gradient(&self, i: usize, x: &[f64], t: f64) -> Vec3;

    /// Human-readable Hamiltonian.
    fn formula(&self) -> String;

    fn default_point(&self) -> Vec<f64>;

    /// Drive frequency used by the `ac` engineered control, if the model has one.
    fn drive_frequency(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// `H = B_x σ_x + B_y σ_y`, parameters `(B_x, B_y)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DcField;

impl FieldModel for DcField {
    fn name(&self) -> &str {
        "dc"
    }

    fn n_params(&self) -> usize {
        2
    }

    fn param_names(&self) -> Vec<String> {
        vec!["B_x".into(), "B_y".into()]
    }

    fn field(&self, x: &[f64], _t: f64) -> Vec3 {
        Vec3::new(x[0], x[1], 0.0)
    }

    fn gradient(&self, i: usize, _x: &[f64], _t: f64) -> Vec3 {
        match i {
            0 => Vec3::X,
            1 => Vec3::Y,
            _ => Vec3::ZERO,
        }
    }

    fn formula(&self) -> String {
        "H = B_x σx + B_y σy;  x = (B_x, B_y)".into()
    }

    fn default_point(&self) -> Vec<f64> {
        vec![1.0, 0.5]
    }
}

/// `H = −B (cos ωt σ_x + sin ωt σ_z)`, parameters `(B, ω)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AcField;

impl FieldModel for AcField {
    fn name(&self) -> &str {
        "ac"
    }

    fn n_params(&self) -> usize {
        2
    }

    fn param_names(&self) -> Vec<String> {
        vec!["B".into(), "omega".into()]
    }

    fn field(&self, x: &[f64], t: f64) -> Vec3 {
        let (s, c) = (x[1] * t).sin_cos();
        Vec3::new(-x[0] * c, 0.0, -x[0] * s)
    }

    fn gradient(&self, i: usize, x: &[f64], t: f64) -> Vec3 {
        let (s, c) = (x[1] * t).sin_cos();
        match i {
            0 => Vec3::new(-c, 0.0, -s),
            1 => Vec3::new(x[0] * t * s, 0.0, -x[0] * t * c),
            _ => Vec3::ZERO,
        }
    }

    fn formula(&self) -> String {
        "H = −B (cos(ωt) σx + sin(ωt) σz);  x = (B, ω)".into()
    }

    fn default_point(&self) -> Vec<f64> {
        vec![1.0, 2.0]
    }

    fn drive_frequency(&self, x: &[f64]) -> Option<f64> {
        Some(x[1])
    }
}

/// `H = (cos x_n t + cos x_m t) σ_x + (sin x_n t − sin x_m t) σ_z`,
/// parameters `(x_m, x_n)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoFrequencyField;

impl FieldModel for TwoFrequencyField {
    fn name(&self) -> &str {
        "two_frequency"
    }

    fn n_params(&self) -> usize {
        2
    }

    fn param_names(&self) -> Vec<String> {
        vec!["x_m".into(), "x_n".into()]
    }

    fn field(&self, x: &[f64], t: f64) -> Vec3 {
        let (sm, cm) = (x[0] * t).sin_cos();
        let (sn, cn) = (x[1] * t).sin_cos();
        Vec3::new(cn + cm, 0.0, sn - sm)
    }

    fn gradient(&self, i: usize, x: &[f64], t: f64) -> Vec3 {
        match i {
            0 => {
                let (s, c) = (x[0] * t).sin_cos();
                Vec3::new(-t * s, 0.0, -t * c)
            }
            1 => {
                let (s, c) = (x[1] * t).sin_cos();
                Vec3::new(-t * s, 0.0, t * c)
            }
            _ => Vec3::ZERO,
        }
    }

    fn formula(&self) -> String {
        "H = (cos(x_n t) + cos(x_m t)) σx + (sin(x_n t) − sin(x_m t)) σz;  x = (x_m, x_n)".into()
    }

    fn default_point(&self) -> Vec<f64> {
        vec![1.5, 1.0]
    }
}

/// A constant or a reference to one of the estimated parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Coefficient {
    Value(f64),
    Param { param: usize },
}

impl Coefficient {
    fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Coefficient::Value(v) => v,
            Coefficient::Param { param } => x[param],
        }
    }

    fn param(&self) -> Option<usize> {
        match *self {
            Coefficient::Value(_) => None,
            Coefficient::Param { param } => Some(param),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    Const,
    Cos,
    Sin,
}

/// One term `amplitude · axis · waveform(frequency · t)` of a [`HarmonicField`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicTerm {
    pub axis: [f64; 3],
    pub amplitude: Coefficient,
    pub waveform: Waveform,
    #[serde(default = "zero_frequency")]
    pub frequency: Coefficient,
}

fn zero_frequency() -> Coefficient {
    Coefficient::Value(0.0)
}

/// User-defined model: a sum of harmonic terms whose amplitudes and
/// frequencies may be parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicField {
    name: String,
    n_params: usize,
    terms: Vec<HarmonicTerm>,
}

impl HarmonicField {
    pub fn new(name: impl Into<String>, n_params: usize, terms: Vec<HarmonicTerm>) -> Result<Self> {
        if n_params == 0 {
            return Err(Error::InvalidInput("custom model needs at least one parameter".into()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidInput("custom model needs at least one term".into()));
        }
        for (k, term) in terms.iter().enumerate() {
            if !term.axis.iter().all(|a| a.is_finite()) {
                return Err(Error::InvalidInput(format!("term {k}: axis must be finite")));
            }
            for c in [term.amplitude, term.frequency] {
                match c {
                    Coefficient::Value(v) if !v.is_finite() => {
                        return Err(Error::InvalidInput(format!("term {k}: coefficient must be finite")))
                    }
                    Coefficient::Param { param } if param >= n_params => {
                        return Err(Error::InvalidInput(format!(
                            "term {k}: parameter index {param} out of range for {n_params} parameters"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(HarmonicField { name: name.into(), n_params, terms })
    }

    fn shape(w: Waveform, phase: f64) -> (f64, f64) {
        // (value, derivative w.r.t. phase)
        match w {
            Waveform::Const => (1.0, 0.0),
            Waveform::Cos => (phase.cos(), -phase.sin()),
            Waveform::Sin => (phase.sin(), phase.cos()),
        }
    }
}

impl FieldModel for HarmonicField {
    fn name(&self) -> &str {
        &self.name
    }

    fn n_params(&self) -> usize {
        self.n_params
    }

    fn field(&self, x: &[f64], t: f64) -> Vec3 {
        self.terms.iter().fold(Vec3::ZERO, |acc, term| {
            let (v, _) = Self::shape(term.waveform, term.frequency.eval(x) * t);
            acc + Vec3::from_array(term.axis).scale(term.amplitude.eval(x) * v)
        })
    }

    fn gradient(&self, i: usize, x: &[f64], t: f64) -> Vec3 {
        self.terms.iter().fold(Vec3::ZERO, |acc, term| {
            let (v, dv) = Self::shape(term.waveform, term.frequency.eval(x) * t);
            let mut g = 0.0;
            if term.amplitude.param() == Some(i) {
                g += v;
            }
            if term.frequency.param() == Some(i) && term.waveform != Waveform::Const {
                g += term.amplitude.eval(x) * t * dv;
            }
            acc + Vec3::from_array(term.axis).scale(g)
        })
    }

    fn formula(&self) -> String {
        let fmt_c = |c: &Coefficient| match c {
            Coefficient::Value(v) => format!("{v}"),
            Coefficient::Param { param } => format!("x{}", param + 1),
        };
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|term| {
                let shape = match term.waveform {
                    Waveform::Const => String::new(),
                    Waveform::Cos => format!(" cos({} t)", fmt_c(&term.frequency)),
                    Waveform::Sin => format!(" sin({} t)", fmt_c(&term.frequency)),
                };
                format!("{}{} ({:?})·σ", fmt_c(&term.amplitude), shape, term.axis)
            })
            .collect();
        format!("H = {}", parts.join(" + "))
    }

    fn default_point(&self) -> Vec<f64> {
        vec![1.0; self.n_params]
    }
}

/// Names of the built-in scenarios.
pub const BUILTIN_MODELS: [&str; 3] = ["dc", "ac", "two_frequency"];

pub fn builtin_model(name: &str) -> Option<Box<dyn FieldModel>> {
    match name {
        "dc" => Some(Box::new(DcField)),
        "ac" => Some(Box::new(AcField)),
        "two_frequency" => Some(Box::new(TwoFrequencyField)),
        _ => None,
    }
}
