use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::{builtin_model, FieldModel, HarmonicField, HarmonicTerm, ParameterPoint, ScheduleKind, TimeGrid};
use crate::error::{Error, Result};
use crate::qfim::MIN_FD_STEP;

/// Default grid density in steps per unit time.
pub const STEPS_PER_UNIT_TIME: f64 = 4000.0;

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// One reproducible experiment, as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// `dc`, `ac`, `two_frequency` or `custom`.
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub grid: GridConfig,
    pub control: ScheduleKind,
    /// Extra controls evaluated next to `control` by `sweep`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compare: Vec<ScheduleKind>,
    /// Ascending `t_max` values for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<f64>>,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Field definition for `scenario = "custom"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<CustomModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    #[serde(default = "custom_name")]
    pub name: String,
    pub n_params: usize,
    pub terms: Vec<HarmonicTerm>,
}

fn default_fd_step() -> f64 {
    DEFAULT_FD_STEP
}

fn custom_name() -> String {
    "custom".into()
}

/// A validated configuration with its model instantiated.
#[derive(Debug)]
pub struct Scenario {
    pub name: String,
    pub model: Box<dyn FieldModel>,
    pub point: ParameterPoint,
    pub grid: TimeGrid,
    pub control: ScheduleKind,
    pub compare: Vec<ScheduleKind>,
    pub sweep: Vec<f64>,
    pub fd_step: f64,
    pub output: Option<PathBuf>,
    steps_per_unit: f64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        ScenarioConfig::from_json(&text)
    }

    /// Checks every field and instantiates the model.
    pub fn validate(&self) -> Result<Scenario> {
        let cfg = |e: Error| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(other.to_string()),
        };
        let model: Box<dyn FieldModel> = match (self.scenario.as_str(), &self.model) {
            ("custom", Some(m)) => {
                Box::new(HarmonicField::new(m.name.clone(), m.n_params, m.terms.clone()).map_err(cfg)?)
            }
            ("custom", None) => return Err(Error::Config("scenario `custom` requires a `model` section".into())),
            (name, None) => builtin_model(name).ok_or_else(|| {
                Error::Config(format!("unknown scenario `{name}` (expected dc, ac, two_frequency or custom)"))
            })?,
            (name, Some(_)) => {
                return Err(Error::Config(format!("`model` is only allowed with scenario `custom`, not `{name}`")))
            }
        };
        let n = model.n_params();
        let values = self.x.clone().unwrap_or_else(|| model.default_point());
        if values.len() != n {
            return Err(Error::Config(format!("`x` has {} entries, scenario needs {n}", values.len())));
        }
        let weights = self.weights.clone().unwrap_or_else(|| vec![1.0; n]);
        if weights.len() != n {
            return Err(Error::Config(format!("`weights` has {} entries, scenario needs {n}", weights.len())));
        }
        let point = ParameterPoint::new(values, weights).map_err(cfg)?;

        let t_max = self.grid.t_max;
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Config(format!("grid.t_max must be positive, got {t_max}")));
        }
        let steps = self.grid.steps.unwrap_or_else(|| default_steps(t_max, STEPS_PER_UNIT_TIME));
        let grid = TimeGrid::new(t_max, steps).map_err(cfg)?;
        let steps_per_unit = steps as f64 / t_max;

        let sweep = self.sweep.clone().unwrap_or_default();
        if self.sweep.is_some() && sweep.is_empty() {
            return Err(Error::Config("`sweep` must not be empty".into()));
        }
        if let Some(bad) = sweep.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::Config(format!("sweep values must be positive, got {bad}")));
        }
        if sweep.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("`sweep` must be strictly ascending".into()));
        }
        if !(self.fd_step.is_finite() && self.fd_step >= MIN_FD_STEP) {
            return Err(Error::Config(format!("fd_step must be at least 1e-9, got {}", self.fd_step)));
        }
        for kind in std::iter::once(&self.control).chain(&self.compare) {
            if *kind == ScheduleKind::Custom {
                return Err(Error::Config("control `custom` cannot be built from a config".into()));
            }
            if let ScheduleKind::SingleParam { param } = kind {
                crate::dynamics::resolve_param(model.as_ref(), param)?;
            }
        }
        let mut compare = Vec::new();
        for k in &self.compare {
            if *k != self.control && !compare.contains(k) {
                compare.push(k.clone());
            }
        }
        Ok(Scenario {
            name: self.scenario.clone(),
            model,
            point,
            grid,
            control: self.control.clone(),
            compare,
            sweep,
            fd_step: self.fd_step,
            output: self.output.clone(),
            steps_per_unit,
        })
    }
}

fn default_steps(t_max: f64, density: f64) -> usize {
    ((density * t_max).round() as usize).max(2)
}

impl Scenario {
    /// Grid for another window length at the configured density.
    pub fn grid_for(&self, t_max: f64) -> Result<TimeGrid> {
        TimeGrid::new(t_max, default_steps(t_max, self.steps_per_unit))
    }

    /// `control` followed by the distinct `compare` entries.
    pub fn controls(&self) -> Vec<ScheduleKind> {
        std::iter::once(self.control.clone()).chain(self.compare.iter().cloned()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_frequency_defaults() {
        let c = ScenarioConfig::from_json(
            r#"{"scenario":"two_frequency","grid":{"t_max":1.0},"control":"planar_optimal"}"#,
        )
        .unwrap();
        let s = c.validate().unwrap();
        assert_eq!(s.point.values, vec![1.5, 1.0]);
        assert_eq!(s.point.weights, vec![1.0, 1.0]);
        assert_eq!(s.grid.steps(), 4000);
        assert_eq!(s.fd_step, 1e-5);
        assert_eq!(s.grid_for(0.25).unwrap().steps(), 1000);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"scenario":"dc","grid":{"t_max":1.0},"control":"dc","bogus":1}"#,
            r#"{"scenario":"dc","grid":{"t_max":1.0,"dt":0.1},"control":"dc"}"#,
            r#"{"scenario":"dc","grid":{"t_max":1.0},"control":"warp"}"#,
            r#"{"scenario":"dc","grid":{"t_max":1.0}}"#,
            r#"not json"#,
        ];
        for b in bad {
            assert!(matches!(ScenarioConfig::from_json(b), Err(Error::Config(_))), "{b}");
        }
        let invalid = [
            r#"{"scenario":"quartic","grid":{"t_max":1.0},"control":"dc"}"#,
            r#"{"scenario":"dc","grid":{"t_max":-1.0},"control":"dc"}"#,
            r#"{"scenario":"dc","grid":{"t_max":1.0,"steps":1},"control":"dc"}"#,
            r#"{"scenario":"dc","x":[1.0],"grid":{"t_max":1.0},"control":"dc"}"#,
            r#"{"scenario":"dc","weights":[0.0,0.0],"grid":{"t_max":1.0},"control":"dc"}"#,
            r#"{"scenario":"dc","grid":{"t_max":1.0},"control":"dc","sweep":[2.0,1.0]}"#,
            r#"{"scenario":"dc","grid":{"t_max":1.0},"control":"dc","sweep":[]}"#,
            r#"{"scenario":"dc","grid":{"t_max":1.0},"control":"dc","fd_step":1e-12}"#,
            r#"{"scenario":"dc","grid":{"t_max":1.0},"control":"single_param(9)"}"#,
            r#"{"scenario":"custom","grid":{"t_max":1.0},"control":"none"}"#,
            r#"{"scenario":"dc","grid":{"t_max":1.0},"control":"custom"}"#,
        ];
        for b in invalid {
            let c = ScenarioConfig::from_json(b).unwrap();
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{b}");
        }
    }

    #[test]
    fn custom_model_section() {
        let text = r#"{
            "scenario": "custom",
            "model": {"n_params": 1, "terms": [
                {"axis": [1, 0, 0], "amplitude": {"param": 0}, "waveform": "cos", "frequency": 3.0}
            ]},
            "grid": {"t_max": 0.5, "steps": 100},
            "control": "single_param(0)"
        }"#;
        let s = ScenarioConfig::from_json(text).unwrap().validate().unwrap();
        assert_eq!(s.model.n_params(), 1);
        assert_eq!(s.point.values, vec![1.0]);
    }
}
