use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::trapezoid_weights;

/// Uniform grid on `[0, t_max]` with `steps` intervals and `steps + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_max: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidInput(format!("t_max must be positive and finite, got {t_max}")));
        }
        if steps < 2 {
            return Err(Error::InvalidInput(format!("time grid needs at least 2 steps, got {steps}")));
        }
        Ok(TimeGrid { t_max, steps })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.steps as f64
    }

    /// Node time `t_k = k·dt`; the last node is exactly `t_max`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_max
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes()).map(|k| self.time(k)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.nodes(), self.dt())
    }

    /// Index of the piecewise-constant segment containing node `k` when the
    /// window is split into `segments` equal parts.
    pub fn segment_of(&self, k: usize, segments: usize) -> usize {
        ((k * segments) / self.steps).min(segments - 1)
    }
}

/// Parameter values and the estimation weights attached to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ParameterPoint {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::Dimension(format!("{} parameter values but {} weights", values.len(), weights.len())));
        }
        if values.is_empty() {
            return Err(Error::InvalidInput("at least one parameter is required".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter value {v}")));
        }
        validate_weights(&weights)?;
        Ok(ParameterPoint { values, weights })
    }

    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        ParameterPoint::new(values, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Weights must be finite and nonnegative with at least one strictly positive.
pub fn validate_weights(w: &[f64]) -> Result<()> {
    if let Some(bad) = w.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidInput(format!("weights must be finite and ≥ 0, got {bad}")));
    }
    if !w.iter().any(|w| *w > 0.0) {
        return Err(Error::InvalidInput("at least one weight must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes_and_spacing() {
        let g = TimeGrid::new(2.0, 8).unwrap();
        assert_eq!(g.nodes(), 9);
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(8), 2.0);
        assert!((g.dt() - 0.25).abs() < 1e-16);
        assert!((g.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(f64::NAN, 10).is_err());
    }

    #[test]
    fn segments_cover_nodes() {
        let g = TimeGrid::new(1.0, 100).unwrap();
        assert_eq!(g.segment_of(0, 8), 0);
        assert_eq!(g.segment_of(100, 8), 7);
        let counts: Vec<usize> = (0..8).map(|s| (0..=100).filter(|&k| g.segment_of(k, 8) == s).count()).collect();
        assert!(counts.iter().all(|&c| c >= 12));
    }

    #[test]
    fn weight_validation() {
        assert!(ParameterPoint::new(vec![1.0, 2.0], vec![1.0, 0.0]).is_ok());
        assert!(ParameterPoint::new(vec![1.0, 2.0], vec![0.0, 0.0]).is_err());
        assert!(ParameterPoint::new(vec![1.0, 2.0], vec![1.0, -1.0]).is_err());
        assert!(ParameterPoint::new(vec![1.0], vec![1.0, 1.0]).is_err());
    }
}
