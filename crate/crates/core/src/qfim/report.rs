use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Fisher-information summary of one (model, x, grid, schedule) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QfimReport {
    #[serde(rename = "J")]
    pub j: Vec<Vec<f64>>,
    #[serde(rename = "J_opt")]
    pub j_opt: Vec<f64>,
    pub gap: f64,
    pub weighted_gap: f64,
    /// `+∞` for a singular QFIM; serialized as the string `"inf"`.
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub trace_crb: f64,
    pub svd_lower_bound: f64,
}

impl QfimReport {
    pub fn new(j: Vec<Vec<f64>>, j_opt: Vec<f64>, weights: &[f64], svd_lower_bound: f64) -> Result<Self> {
        let gap = super::uniform_gap(&j, &j_opt)?;
        let weighted_gap = super::gap(&j, &j_opt, weights)?;
        let trace_crb = super::trace_crb(&j);
        let report = QfimReport { j, j_opt, gap, weighted_gap, trace_crb, svd_lower_bound };
        let finite = report.j.iter().flatten().chain(&report.j_opt).all(|v| v.is_finite())
            && report.gap.is_finite()
            && report.weighted_gap.is_finite()
            && report.svd_lower_bound.is_finite();
        if !finite {
            return Err(Error::NonFinite("QFIM report".into()));
        }
        Ok(report)
    }

    pub fn weighted_diagonal(&self, w: &[f64]) -> f64 {
        w.iter().enumerate().map(|(i, w)| w * self.j[i][i]).sum()
    }
}

/// Whether every off-diagonal entry is below `tol` times the largest diagonal entry.
pub fn is_diagonal(j: &[Vec<f64>], tol: f64) -> bool {
    let scale = (0..j.len()).map(|i| j[i][i].abs()).fold(0.0, f64::max);
    (0..j.len()).all(|a| (0..j.len()).all(|b| a == b || j[a][b].abs() <= tol * scale))
}

fn ser_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_extended<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Ext {
        Num(f64),
        Tok(String),
    }
    match Ext::deserialize(d)? {
        Ext::Num(v) => Ok(v),
        Ext::Tok(t) if t == "inf" => Ok(f64::INFINITY),
        Ext::Tok(t) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {t:?}"))),
    }
}
