//! CSV artifacts with pinned column layouts. Floats are written with
//! Rust's shortest round-trip formatting, so parsing a cell back yields
//! the exact bit pattern that was measured; undefined values are blank
//! cells, never NaN text. The meta.txt sidecar is the only artifact
//! allowed to carry a timestamp.

use crate::error::{LionError, Result};
use crate::harness::runner::{CompareRow, RunRecord, SummaryRow};
use crate::harness::verify::VerifyReport;
use crate::ratefit::SweepResult;
use std::path::Path;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_bool(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

pub const RUN_CSV_HEADER: [&str; 11] = [
    "run_id",
    "seed",
    "k",
    "f",
    "grad_l1",
    "grad_l2",
    "ratio",
    "kkt_residual",
    "theta_linf",
    "delta_l2",
    "feasible",
];

pub fn write_run_csv(path: &Path, record: &RunRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RUN_CSV_HEADER)?;
    for s in &record.logged {
        w.write_record([
            record.run_id.clone(),
            record.seed.to_string(),
            s.k.to_string(),
            fmt_f64(s.f),
            fmt_f64(s.grad_l1),
            fmt_f64(s.grad_l2),
            fmt_opt_f64(s.ratio),
            fmt_f64(s.kkt_residual),
            fmt_f64(s.theta_linf),
            fmt_f64(s.delta_l2),
            s.feasible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const SUMMARY_CSV_HEADER: [&str; 21] = [
    "config_hash",
    "n_seeds",
    "K",
    "d",
    "lambda",
    "sigma",
    "mean_avg_kkt_residual",
    "se_avg_kkt_residual",
    "mean_avg_grad_l1",
    "mean_avg_delta",
    "corollary1_bound",
    "theorem1_bound",
    "lemma2_bound",
    "f_trajectory_bound",
    "corollary1_ok",
    "theorem1_ok",
    "lemma2_ok",
    "f_trajectory_ok",
    "mode",
    "mean_max_f_gap",
    "n_aborted",
];

pub fn write_summary_csv(path: &Path, row: &SummaryRow) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SUMMARY_CSV_HEADER)?;
    w.write_record([
        row.config_hash.clone(),
        row.n_seeds.to_string(),
        row.k.to_string(),
        row.d.to_string(),
        fmt_f64(row.lambda),
        fmt_f64(row.sigma),
        fmt_f64(row.mean_avg_kkt_residual),
        fmt_f64(row.se_avg_kkt_residual),
        fmt_f64(row.mean_avg_grad_l1),
        fmt_f64(row.mean_avg_delta),
        fmt_opt_f64(row.bounds.stationarity_lumped),
        fmt_opt_f64(row.bounds.stationarity_full),
        fmt_f64(row.bounds.momentum_deviation),
        fmt_opt_f64(row.bounds.f_trajectory),
        fmt_opt_bool(row.stationarity_lumped_ok),
        fmt_opt_bool(row.stationarity_full_ok),
        row.momentum_deviation_ok.to_string(),
        fmt_opt_bool(row.f_trajectory_ok),
        row.mode.as_str().to_string(),
        fmt_f64(row.mean_max_f_gap),
        row.n_aborted.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

pub const SWEEP_CSV_HEADER: [&str; 6] = [
    "axis",
    "axis_value",
    "mean_metric",
    "std_error",
    "bound_value",
    "mean_ratio",
];

pub fn write_sweep_csv(path: &Path, sweep: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SWEEP_CSV_HEADER)?;
    for p in &sweep.points {
        w.write_record([
            sweep.axis.label().to_string(),
            fmt_f64(p.axis_value),
            fmt_f64(p.mean_metric),
            fmt_f64(p.std_error),
            fmt_f64(p.bound_value),
            fmt_opt_f64(p.mean_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const SWEEP_FIT_CSV_HEADER: [&str; 4] = ["series", "slope", "intercept", "r_squared"];

pub fn write_sweep_fit_csv(path: &Path, sweep: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SWEEP_FIT_CSV_HEADER)?;
    let mut rows = vec![("metric", &sweep.metric_fit), ("bound", &sweep.bound_fit)];
    if let Some(fit) = &sweep.ratio_fit {
        rows.push(("ratio", fit));
    }
    for (name, fit) in rows {
        w.write_record([
            name.to_string(),
            fmt_f64(fit.slope),
            fmt_f64(fit.intercept),
            fmt_f64(fit.r_squared),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const COMPARE_CSV_HEADER: [&str; 5] =
    ["k", "lion_f", "lion_grad_l1", "sgd_f", "sgd_grad_l1"];

pub fn write_compare_csv(path: &Path, rows: &[CompareRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(COMPARE_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            fmt_f64(r.lion_f),
            fmt_f64(r.lion_grad_l1),
            fmt_f64(r.sgd_f),
            fmt_f64(r.sgd_grad_l1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const VERIFY_CSV_HEADER: [&str; 5] = ["name", "pass", "observed", "threshold", "detail"];

pub fn write_verify_csv(path: &Path, report: &VerifyReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(VERIFY_CSV_HEADER)?;
    for c in &report.checks {
        w.write_record([
            c.name.clone(),
            c.pass.to_string(),
            fmt_f64(c.observed),
            fmt_f64(c.threshold),
            c.detail.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The sidecar holds provenance that must not leak into the CSVs:
/// the config hash, the wall-clock time, and the library version.
pub fn write_meta(path: &Path, config_hash: &str) -> Result<()> {
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let body = format!(
        "config_hash={config_hash}\ncreated_unix={created}\nversion={}\n",
        env!("CARGO_PKG_VERSION")
    );
    std::fs::write(path, body)?;
    Ok(())
}

/// A parsed CSV with headers, for plotting and tests.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LionError::InvalidInput(format!("no column named '{name}'")))
    }

    /// Column as floats; blank cells become None.
    pub fn float_column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .map(|row| {
                let cell = row.get(idx).map(String::as_str).unwrap_or("");
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| {
                        LionError::InvalidInput(format!(
                            "column '{name}': cannot parse '{cell}' as a number"
                        ))
                    })
                }
            })
            .collect()
    }
}

pub fn read_table(path: &Path) -> Result<CsvTable> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let headers = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        rows.push(record?.iter().map(str::to_string).collect());
    }
    Ok(CsvTable { headers, rows })
}
