//! Command line front end. Every subcommand reads the same config
//! format; artifacts land in the config's output directory.
//!
//! Exit codes: 0 success, 1 unusable config or arguments, 2 a
//! certification check failed, 3 the run itself broke down (I/O,
//! divergence, non-finite values).

use clap::{Parser, Subcommand};
use lion_core::harness::csvio::{self, read_table, CsvTable};
use lion_core::harness::svg::{render_chart, ChartSpec, Series};
use lion_core::{
    run_baseline_comparison, run_experiment, run_sweep, verify_suite, ExperimentConfig,
    LionError, SweepResult,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lion",
    version,
    about = "Sign-momentum optimization experiments with certified schedules"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a multi-seed experiment; writes runs/*.csv, summary.csv, meta.txt
    Run {
        /// Experiment config file
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep the budget or dimension axis; writes sweep.csv, sweep_fit.csv
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Paired comparison against plain SGD; writes compare.csv, compare.svg
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Certification battery; writes verify_report.csv
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Render a chart from any artifact CSV
    Plot {
        /// Artifact CSV produced by run, sweep, or compare
        #[arg(long)]
        input: PathBuf,
        /// Output SVG path
        #[arg(long)]
        output: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_CERTIFICATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn exit_code_for(err: &LionError) -> u8 {
    match err {
        LionError::Config(_)
        | LionError::InvalidInput(_)
        | LionError::Unsupported(_)
        | LionError::Budget(_) => EXIT_CONFIG,
        LionError::Io(_)
        | LionError::Csv(_)
        | LionError::NonFinite(_)
        | LionError::Domain(_)
        | LionError::DimensionMismatch { .. } => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version requests are not errors
            let failed = err.use_stderr();
            let _ = err.print();
            return if failed {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "ok",
        Some(false) => "violated",
        None => "n/a",
    }
}

fn dispatch(cli: Cli) -> lion_core::Result<u8> {
    match cli.cmd {
        Cmd::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let out = run_experiment(&cfg)?;
            let s = &out.summary;
            println!(
                "config {}: {} seeds, K = {}, d = {}, lambda = {}, sigma = {}",
                s.config_hash, s.n_seeds, s.k, s.d, s.lambda, s.sigma
            );
            println!(
                "mean avg kkt residual = {} (se {}), mean avg |grad|_1 = {}",
                csvio::fmt_f64(s.mean_avg_kkt_residual),
                csvio::fmt_f64(s.se_avg_kkt_residual),
                csvio::fmt_f64(s.mean_avg_grad_l1)
            );
            println!(
                "certificates: stationarity lumped {}, full {}, momentum {}, trajectory {}",
                flag(s.stationarity_lumped_ok),
                flag(s.stationarity_full_ok),
                flag(Some(s.momentum_deviation_ok)),
                flag(s.f_trajectory_ok)
            );
            println!("wrote {}", cfg.out_dir.join("summary.csv").display());
            if s.n_aborted > 0 {
                for r in out.records.iter().filter(|r| r.aborted.is_some()) {
                    eprintln!(
                        "run {} aborted: {}",
                        r.run_id,
                        r.aborted.as_deref().unwrap_or("unknown")
                    );
                }
                return Ok(EXIT_RUNTIME);
            }
            let feasibility_broken =
                lion_core::harness::runner::feasibility_violated(&out.records, out.resolved.lam);
            if lion_core::harness::runner::any_certificate_failed(s) || feasibility_broken {
                eprintln!("certification failed; see summary.csv");
                return Ok(EXIT_CERTIFICATION);
            }
            Ok(0)
        }
        Cmd::Sweep { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let sweep = run_sweep(&cfg)?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            csvio::write_sweep_csv(&cfg.out_dir.join("sweep.csv"), &sweep)?;
            csvio::write_sweep_fit_csv(&cfg.out_dir.join("sweep_fit.csv"), &sweep)?;
            csvio::write_meta(&cfg.out_dir.join("meta.txt"), &cfg.config_hash())?;
            print_sweep(&sweep);
            println!("wrote {}", cfg.out_dir.join("sweep.csv").display());
            if !sweep.metric_below_bound() {
                eprintln!("certification failed: a sweep cell sits above its certified level");
                return Ok(EXIT_CERTIFICATION);
            }
            Ok(0)
        }
        Cmd::Compare { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let out = run_baseline_comparison(&cfg)?;
            lion_core::write_comparison(&out)?;
            let last = out.rows.last().expect("comparison has rows");
            println!(
                "final seed means after {} steps: f {} vs {} (sgd), |grad|_1 {} vs {} (sgd)",
                last.k,
                csvio::fmt_f64(last.lion_f),
                csvio::fmt_f64(last.sgd_f),
                csvio::fmt_f64(last.lion_grad_l1),
                csvio::fmt_f64(last.sgd_grad_l1)
            );
            println!(
                "wrote {} and {}",
                cfg.out_dir.join("compare.csv").display(),
                cfg.out_dir.join("compare.svg").display()
            );
            Ok(0)
        }
        Cmd::Verify { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let report = verify_suite(&cfg)?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            csvio::write_verify_csv(&cfg.out_dir.join("verify_report.csv"), &report)?;
            for c in &report.checks {
                println!(
                    "{:<28} {} (observed {}, threshold {})",
                    c.name,
                    if c.pass { "pass" } else { "FAIL" },
                    csvio::fmt_f64(c.observed),
                    csvio::fmt_f64(c.threshold)
                );
            }
            println!(
                "wrote {}",
                cfg.out_dir.join("verify_report.csv").display()
            );
            if !report.all_pass() {
                eprintln!("certification failed; see verify_report.csv");
                return Ok(EXIT_CERTIFICATION);
            }
            Ok(0)
        }
        Cmd::Plot { input, output } => {
            let table = read_table(&input)?;
            let chart = chart_for(&table, &input)?;
            std::fs::write(&output, render_chart(&chart)?)?;
            println!("wrote {}", output.display());
            Ok(0)
        }
    }
}

fn print_sweep(sweep: &SweepResult) {
    println!(
        "{} sweep over {} points: metric slope {}, bound slope {}",
        sweep.axis.label(),
        sweep.points.len(),
        csvio::fmt_f64(sweep.metric_fit.slope),
        csvio::fmt_f64(sweep.bound_fit.slope)
    );
    if let Some(fit) = &sweep.ratio_fit {
        println!(
            "norm ratio slope {} (r^2 {})",
            csvio::fmt_f64(fit.slope),
            csvio::fmt_f64(fit.r_squared)
        );
    }
}

/// Picks series by the artifact's header so any run, sweep, or compare
/// CSV plots without extra flags.
fn chart_for(table: &CsvTable, input: &Path) -> lion_core::Result<ChartSpec> {
    let name = input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    let has = |col: &str| table.headers.iter().any(|h| h == col);
    let series_from = |x_col: &str, y_col: &str, dashed: bool| -> lion_core::Result<Series> {
        let xs = table.float_column(x_col)?;
        let ys = table.float_column(y_col)?;
        let points = xs
            .into_iter()
            .zip(ys)
            .filter_map(|(x, y)| Some((x?, y?)))
            .collect();
        Ok(Series {
            label: y_col.to_string(),
            points,
            dashed,
        })
    };

    if has("kkt_residual") && has("run_id") {
        return Ok(ChartSpec {
            title: name,
            x_label: "step".into(),
            y_label: "value".into(),
            log_x: true,
            log_y: true,
            series: vec![
                series_from("k", "f", false)?,
                series_from("k", "grad_l1", false)?,
                series_from("k", "kkt_residual", false)?,
            ],
        });
    }
    if has("mean_metric") {
        let mut series = vec![
            series_from("axis_value", "mean_metric", false)?,
            series_from("axis_value", "bound_value", true)?,
        ];
        if let Ok(ratio) = series_from("axis_value", "mean_ratio", false) {
            if !ratio.points.is_empty() {
                series.push(ratio);
            }
        }
        return Ok(ChartSpec {
            title: name,
            x_label: table
                .rows
                .first()
                .and_then(|r| r.first())
                .cloned()
                .unwrap_or_else(|| "axis".into()),
            y_label: "value".into(),
            log_x: true,
            log_y: true,
            series,
        });
    }
    if has("lion_f") {
        return Ok(ChartSpec {
            title: name,
            x_label: "step".into(),
            y_label: "seed mean".into(),
            log_x: true,
            log_y: true,
            series: vec![
                series_from("k", "lion_f", false)?,
                series_from("k", "sgd_f", true)?,
                series_from("k", "lion_grad_l1", false)?,
                series_from("k", "sgd_grad_l1", true)?,
            ],
        });
    }
    if has("config_hash") {
        return Err(LionError::Unsupported(
            "summary.csv is a single row; plot a per-run CSV or a sweep instead".into(),
        ));
    }
    if has("observed") {
        return Err(LionError::Unsupported(
            "verify reports are tabular; there is nothing to chart".into(),
        ));
    }
    Err(LionError::InvalidInput(format!(
        "unrecognized artifact layout in {name}"
    )))
}
