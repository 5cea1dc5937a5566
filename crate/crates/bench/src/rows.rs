//! Result rows, their CSV form, and per-cell aggregates.

use std::io::{Read, Write};

use crate::BenchError;

pub const CSV_HEADER: [&str; 12] = [
    "family",
    "n",
    "cond",
    "method",
    "policy",
    "seed",
    "solution_norm",
    "residual_norm",
    "iterations",
    "termination",
    "elapsed_s",
    "fallbacks",
];

pub const SUMMARY_HEADER: [&str; 13] = [
    "family",
    "n",
    "cond",
    "method",
    "policy",
    "trials",
    "mean_solution_norm",
    "mean_residual_norm",
    "median_solution_norm",
    "median_residual_norm",
    "mean_iterations",
    "converged",
    "breakdowns",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub family: String,
    pub n: usize,
    /// Target condition number (random), measured `cond₂` (small Hilbert),
    /// or unknown.
    pub cond: Option<f64>,
    pub method: String,
    pub policy: String,
    pub seed: u64,
    pub solution_norm: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub termination: String,
    pub elapsed_s: f64,
    pub fallbacks: usize,
}

/// 17 significant digits, so the value parses back bit for bit.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn parse_float(s: &str) -> Result<f64, BenchError> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse()
            .map_err(|_| BenchError::Parse(format!("bad float `{s}`"))),
    }
}

fn parse_int<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, BenchError> {
    s.parse()
        .map_err(|_| BenchError::Parse(format!("bad {what} `{s}`")))
}

fn format_cond(c: Option<f64>) -> String {
    c.map(format_float).unwrap_or_default()
}

impl ResultRow {
    fn record(&self) -> [String; 12] {
        [
            self.family.clone(),
            self.n.to_string(),
            format_cond(self.cond),
            self.method.clone(),
            self.policy.clone(),
            self.seed.to_string(),
            format_float(self.solution_norm),
            format_float(self.residual_norm),
            self.iterations.to_string(),
            self.termination.clone(),
            format_float(self.elapsed_s),
            self.fallbacks.to_string(),
        ]
    }

    fn from_record(rec: &csv::StringRecord) -> Result<Self, BenchError> {
        if rec.len() != CSV_HEADER.len() {
            return Err(BenchError::Parse(format!(
                "expected {} fields, found {}",
                CSV_HEADER.len(),
                rec.len()
            )));
        }
        Ok(Self {
            family: rec[0].to_string(),
            n: parse_int(&rec[1], "n")?,
            cond: if rec[2].is_empty() {
                None
            } else {
                Some(parse_float(&rec[2])?)
            },
            method: rec[3].to_string(),
            policy: rec[4].to_string(),
            seed: parse_int(&rec[5], "seed")?,
            solution_norm: parse_float(&rec[6])?,
            residual_norm: parse_float(&rec[7])?,
            iterations: parse_int(&rec[8], "iterations")?,
            termination: rec[9].to_string(),
            elapsed_s: parse_float(&rec[10])?,
            fallbacks: parse_int(&rec[11], "fallbacks")?,
        })
    }

    /// Series label used in summaries and plots.
    pub fn series(&self) -> String {
        format!("{}/{}", self.method, self.policy)
    }
}

pub fn emit_csv<W: Write>(rows: &[ResultRow], sink: W) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(source: R) -> Result<Vec<ResultRow>, BenchError> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(source);
    let mut records = r.records();
    match records.next() {
        Some(header) => {
            let header = header?;
            if header.iter().ne(CSV_HEADER) {
                return Err(BenchError::Parse("unexpected CSV header".into()));
            }
        }
        None => return Err(BenchError::Parse("empty CSV".into())),
    }
    records
        .map(|rec| ResultRow::from_record(&rec?))
        .collect()
}

/// Aggregate over the trials of one `(family, n, cond, method, policy)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub family: String,
    pub n: usize,
    pub cond: Option<f64>,
    pub method: String,
    pub policy: String,
    pub trials: usize,
    pub mean_solution_norm: f64,
    pub mean_residual_norm: f64,
    pub median_solution_norm: f64,
    pub median_residual_norm: f64,
    pub mean_iterations: f64,
    pub converged: usize,
    pub breakdowns: usize,
}

impl SummaryRow {
    pub fn series(&self) -> String {
        format!("{}/{}", self.method, self.policy)
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// NaN sorts last, so a single NaN does not poison the median.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Groups rows by cell in first-appearance order.
///
/// The random family generates a fresh matrix per trial, so its `cond`
/// column (the target) is part of the key; trials of one Hilbert size share
/// one matrix.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    type Key = (String, usize, Option<u64>, String, String);
    let key = |r: &ResultRow| -> Key {
        (
            r.family.clone(),
            r.n,
            r.cond.map(f64::to_bits),
            r.method.clone(),
            r.policy.clone(),
        )
    };
    let mut order: Vec<Key> = Vec::new();
    let mut groups: std::collections::HashMap<Key, Vec<&ResultRow>> = Default::default();
    for r in rows {
        let k = key(r);
        groups
            .entry(k.clone())
            .or_insert_with(|| {
                order.push(k);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|k| {
            let g = &groups[&k];
            let xs: Vec<f64> = g.iter().map(|r| r.solution_norm).collect();
            let rs: Vec<f64> = g.iter().map(|r| r.residual_norm).collect();
            let its: Vec<f64> = g.iter().map(|r| r.iterations as f64).collect();
            SummaryRow {
                family: k.0,
                n: k.1,
                cond: g[0].cond,
                method: k.3,
                policy: k.4,
                trials: g.len(),
                mean_solution_norm: mean(&xs),
                mean_residual_norm: mean(&rs),
                median_solution_norm: median(&xs),
                median_residual_norm: median(&rs),
                mean_iterations: mean(&its),
                converged: g.iter().filter(|r| r.termination == "converged").count(),
                breakdowns: g.iter().filter(|r| r.termination == "breakdown").count(),
            }
        })
        .collect()
}

pub fn emit_summary_csv<W: Write>(rows: &[SummaryRow], sink: W) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(SUMMARY_HEADER)?;
    for s in rows {
        w.write_record([
            s.family.clone(),
            s.n.to_string(),
            format_cond(s.cond),
            s.method.clone(),
            s.policy.clone(),
            s.trials.to_string(),
            format_float(s.mean_solution_norm),
            format_float(s.mean_residual_norm),
            format_float(s.median_solution_norm),
            format_float(s.median_residual_norm),
            format_float(s.mean_iterations),
            s.converged.to_string(),
            s.breakdowns.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            family: "hilbert".into(),
            n: 12,
            cond: None,
            method: "cgs".into(),
            policy: "classic".into(),
            seed: u64::MAX,
            solution_norm: std::f64::consts::PI * 1e17,
            residual_norm: f64::INFINITY,
            iterations: 120,
            termination: "breakdown".into(),
            elapsed_s: 0.0,
            fallbacks: 0,
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        let mut out = Vec::new();
        emit_csv(&[], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "family,n,cond,method,policy,seed,solution_norm,residual_norm,iterations,termination,elapsed_s,fallbacks\n"
        );
    }

    #[test]
    fn one_row_round_trips() {
        let mut out = Vec::new();
        emit_csv(&[row()], &mut out).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains(",inf,"));
        let back = read_csv(out.as_slice()).unwrap();
        assert_eq!(back, vec![row()]);
    }

    #[test]
    fn floats_keep_every_bit() {
        for v in [0.1, 1.0 / 3.0, 5e-324, f64::MAX, -2.5e-300, 0.0] {
            let s = format_float(v);
            assert_eq!(parse_float(&s).unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert!(parse_float(&format_float(f64::NAN)).unwrap().is_nan());
    }

    #[test]
    fn summary_means_and_medians() {
        let mut rows = Vec::new();
        for (k, r) in [1.0, 2.0, 6.0].iter().enumerate() {
            rows.push(ResultRow {
                seed: k as u64,
                residual_norm: *r,
                solution_norm: 10.0 * r,
                termination: "converged".into(),
                ..row()
            });
        }
        let s = summarize(&rows);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].trials, 3);
        assert_eq!(s[0].mean_residual_norm, 3.0);
        assert_eq!(s[0].median_residual_norm, 2.0);
        assert_eq!(s[0].median_solution_norm, 20.0);
        assert_eq!(s[0].converged, 3);
    }

    #[test]
    fn median_puts_nan_last() {
        assert_eq!(median(&[f64::NAN, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0]), 2.5);
    }
}
