use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::{evaluate_all, Scenario};
use crate::dynamics::ScheduleKind;
use crate::error::{Error, Result};
use crate::qfim::QfimReport;

/// One `(t_max, control)` evaluation in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t_max: f64,
    pub control: String,
    pub j: Vec<Vec<f64>>,
    pub j_opt: Vec<f64>,
    pub gap: f64,
    pub weighted_gap: f64,
    pub trace_crb: f64,
    pub svd_lb: f64,
}

impl SweepRow {
    pub fn from_report(t_max: f64, control: &ScheduleKind, r: &QfimReport) -> Self {
        SweepRow {
            t_max,
            control: control.label(),
            j: r.j.clone(),
            j_opt: r.j_opt.clone(),
            gap: r.gap,
            weighted_gap: r.weighted_gap,
            trace_crb: r.trace_crb,
            svd_lb: r.svd_lower_bound,
        }
    }

    pub fn n_params(&self) -> usize {
        self.j_opt.len()
    }

    fn fields(&self) -> Vec<String> {
        let n = self.n_params();
        let mut out = vec![num(self.t_max), self.control.clone()];
        out.extend((0..n).map(|i| num(self.j[i][i])));
        for a in 0..n {
            out.extend((a + 1..n).map(|b| num(self.j[a][b])));
        }
        out.extend(self.j_opt.iter().map(|v| num(*v)));
        out.extend([self.gap, self.weighted_gap, self.trace_crb, self.svd_lb].map(num));
        out
    }

    /// Row invariants: positive `t_max`, a valid control label, non-negative
    /// diagonals and optima, Cauchy–Schwarz off-diagonals, and a gap equal to
    /// `Σ (J^opt_i − J_ii)`.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(format!("sweep row at t_max={}: {m}", self.t_max)));
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad("t_max must be positive".into());
        }
        if let Err(e) = self.control.parse::<ScheduleKind>() {
            return bad(e.to_string());
        }
        let n = self.n_params();
        for i in 0..n {
            if !(self.j[i][i] >= 0.0) || !(self.j_opt[i] >= 0.0) {
                return bad(format!("negative J_{0}{0} or Jopt_{0}", i + 1));
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let bound = (self.j[a][a] * self.j[b][b]).sqrt();
                if self.j[a][b].abs() > bound * (1.0 + 1e-9) + 1e-12 {
                    return bad(format!("|J_{}{}| exceeds √(J_aa J_bb)", a + 1, b + 1));
                }
            }
        }
        let expect: f64 = (0..n).map(|i| self.j_opt[i] - self.j[i][i]).sum();
        let scale: f64 = self.j_opt.iter().sum::<f64>().max(1.0);
        if expect.is_finite() && !((self.gap - expect).abs() <= 1e-9 * scale) {
            return bad(format!("gap {} differs from Σ(Jopt − J_ii) = {expect}", self.gap));
        }
        Ok(())
    }
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

fn parse_num(s: &str, column: &str) -> Result<f64> {
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::InvalidInput(format!("column {column}: `{s}` is not a finite number or `inf`"))),
    }
}

fn column_count(n: usize) -> usize {
    2 + n + n * n.saturating_sub(1) / 2 + n + 4
}

/// Column names for `n` parameters; for `n = 2` this is
/// `t_max,control,J_11,J_22,J_12,Jopt_1,Jopt_2,gap,weighted_gap,trace_crb,svd_lb`.
pub fn sweep_header(n: usize) -> Vec<String> {
    let pair = |a: usize, b: usize| {
        if n < 10 {
            format!("J_{}{}", a + 1, b + 1)
        } else {
            format!("J_{}_{}", a + 1, b + 1)
        }
    };
    let mut h = vec!["t_max".to_string(), "control".to_string()];
    h.extend((0..n).map(|i| pair(i, i)));
    for a in 0..n {
        h.extend((a + 1..n).map(|b| pair(a, b)));
    }
    h.extend((0..n).map(|i| format!("Jopt_{}", i + 1)));
    h.extend(["gap", "weighted_gap", "trace_crb", "svd_lb"].map(String::from));
    h
}

/// `T ∈ {0.25, 0.5, …, 3}`.
pub fn default_sweep() -> Vec<f64> {
    (1..=12).map(|k| 0.25 * k as f64).collect()
}

/// One row per `(t_max, control)`, `t_max` outermost, controls in config
/// order. Window lengths are evaluated in parallel.
pub fn sweep(s: &Scenario) -> Result<Vec<SweepRow>> {
    if s.sweep.is_empty() {
        return Err(Error::Config("sweep needs a non-empty `sweep` list".into()));
    }
    let controls = s.controls();
    let per_t: Vec<Vec<SweepRow>> = s
        .sweep
        .par_iter()
        .map(|&t| {
            let grid = s.grid_for(t)?;
            let evals = evaluate_all(s.model.as_ref(), &s.point, &grid, &controls)?;
            Ok(controls.iter().zip(&evals).map(|(k, e)| SweepRow::from_report(t, k, &e.report)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_t.into_iter().flatten().collect())
}

/// Renders rows as CSV text with the `sweep_header(n)` header.
pub fn sweep_csv(rows: &[SweepRow], n: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(sweep_header(n))?;
    for r in rows {
        if r.n_params() != n || r.j.len() != n {
            return Err(Error::Dimension(format!("row has {} parameters, header {n}", r.n_params())));
        }
        w.write_record(r.fields())?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII fields"))
}

/// Writes the CSV to a temporary file next to `path`, then renames it into place.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow], n: usize) -> Result<()> {
    let text = sweep_csv(rows, n)?;
    write_atomic(path, text.as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Parses one record against a header for `n` parameters.
pub fn parse_sweep_row(record: &csv::StringRecord, n: usize) -> Result<SweepRow> {
    let header = sweep_header(n);
    if record.len() != header.len() {
        return Err(Error::InvalidInput(format!("row has {} fields, expected {}", record.len(), header.len())));
    }
    let f = |k: usize| parse_num(&record[k], &header[k]);
    let t_max = f(0)?;
    let mut j = vec![vec![0.0; n]; n];
    let mut k = 2;
    for (i, row) in j.iter_mut().enumerate() {
        row[i] = f(k)?;
        k += 1;
    }
    for a in 0..n {
        for b in a + 1..n {
            let v = f(k)?;
            j[a][b] = v;
            j[b][a] = v;
            k += 1;
        }
    }
    let j_opt = (0..n).map(|i| f(k + i)).collect::<Result<Vec<_>>>()?;
    k += n;
    let row = SweepRow {
        t_max,
        control: record[1].to_string(),
        j,
        j_opt,
        gap: f(k)?,
        weighted_gap: f(k + 1)?,
        trace_crb: f(k + 2)?,
        svd_lb: f(k + 3)?,
    };
    row.check()?;
    Ok(row)
}

/// Parses a sweep CSV, inferring the parameter count from the header and
/// checking every row's invariants.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut records = r.records();
    let header = records.next().ok_or_else(|| Error::InvalidInput("empty sweep CSV".into()))??;
    let n = (0..header.len()).take_while(|&n| column_count(n) < header.len()).count();
    let expected = sweep_header(n);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::InvalidInput(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    records.map(|rec| parse_sweep_row(&rec?, n)).collect()
}
