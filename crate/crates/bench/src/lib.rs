//! Experiment harness for the `stable-krylov` solvers.
//!
//! Sweeps run every selected method under every selected step policy on
//! Hilbert matrices, seeded random symmetric matrices of prescribed
//! condition number, or Matrix Market files, and write one CSV row per
//! (matrix, method, policy, trial) plus per-cell means and medians and SVG
//! charts of the means.
//!
//! Output is deterministic: the same config and base seed give a
//! byte-identical CSV, independent of the number of worker threads.
//! `elapsed_s` is written as 0 unless timing is requested.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod config;
pub mod fetch;
pub mod plot;
pub mod rows;
pub mod runner;

pub use config::{ExperimentConfig, Family, Instances, SolveOverrides};
pub use plot::{emit_plot, Metric, PlotSpec, XAxis};
pub use rows::{emit_csv, read_csv, summarize, ResultRow, SummaryRow};
pub use runner::{run_experiment, run_file_experiment, run_hilbert_sweep, run_random_sweep};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Matrix {
        path: String,
        source: stable_krylov::mmio::MmioError,
    },
    #[error(transparent)]
    Solve(#[from] stable_krylov::SolveError),
    #[error(transparent)]
    Linalg(#[from] stable_krylov::linalg::LinalgError),
    #[error(transparent)]
    Matgen(#[from] stable_krylov::matgen::MatgenError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("nothing to plot for selection ({0})")]
    EmptySelection(String),
    #[error("fetch failed: {0}")]
    Fetch(String),
}

/// Files written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct Outputs {
    pub rows: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    fs::write(path, bytes).map_err(|e| BenchError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Writes `<stem>.csv`, `<stem>_summary.csv` and, when an x axis is given,
/// one `<stem>_<metric>.svg` per metric into `dir`.
pub fn write_outputs(
    dir: &Path,
    stem: &str,
    rows: &[ResultRow],
    plot_x: Option<XAxis>,
) -> Result<Outputs, BenchError> {
    fs::create_dir_all(dir).map_err(|e| BenchError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let mut buf = Vec::new();
    emit_csv(rows, &mut buf)?;
    let rows_path = dir.join(format!("{stem}.csv"));
    write_file(&rows_path, &buf)?;

    let mut buf = Vec::new();
    rows::emit_summary_csv(&summarize(rows), &mut buf)?;
    let summary_path = dir.join(format!("{stem}_summary.csv"));
    write_file(&summary_path, &buf)?;

    let mut plots = Vec::new();
    if let (Some(x), false) = (plot_x, rows.is_empty()) {
        for metric in [Metric::SolutionNorm, Metric::ResidualNorm] {
            let spec = PlotSpec {
                title: format!("{stem}: {}", metric.label()),
                ..PlotSpec::new(metric, x)
            };
            let path = dir.join(format!("{stem}_{}.svg", metric.file_stem()));
            write_file(&path, emit_plot(rows, &spec)?.as_bytes())?;
            plots.push(path);
        }
    }
    Ok(Outputs {
        rows: rows_path,
        summary: summary_path,
        plots,
    })
}
