//! Experiment execution. A config resolves into a concrete problem,
//! start point, decay strength, and hyperparameter schedule, with every
//! compatibility rule checked up front. Runs are then deterministic
//! functions of (resolved experiment, seed).
//!
//! Each step makes two gradient calls: an exact one that feeds the
//! logged diagnostics and a noisy one that feeds the optimizer. The
//! logging pass never touches optimizer state, so thinning the log
//! cannot change the trajectory.

use crate::error::{LionError, Result};
use crate::harness::config::{
    ExperimentConfig, LambdaSpec, Mode, MomentumInit, ScheduleSpec,
};
use crate::harness::csvio;
use crate::harness::svg::{render_chart, ChartSpec, Series};
use crate::metrics::{
    balanced_stationarity_bound, f_trajectory_bound, momentum_error_bound, stationarity_bound,
    RunAggregates, RunningAggregates, StepMetrics, FEASIBILITY_SLACK,
};
use crate::optim::{lion_step, sgd_step, LionConfig, LionState, SgdConfig};
use crate::problems::{GradOracle, NoiseModel, Problem};
use crate::schedule::{choose_lambda_unconstrained, TheoryConstants};
use crate::vector::ParamVector;
use rayon::prelude::*;

/// Certified envelopes for one resolved experiment. The lumped
/// stationarity rate only applies when every schedule coefficient came
/// from the balanced defaults; the momentum deviation envelope holds for
/// any fixed configuration, so it is never absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSet {
    /// Lumped stationarity rate, balanced coefficients only.
    pub stationarity_lumped: Option<f64>,
    /// Full five-term stationarity envelope, any theory coefficients.
    pub stationarity_full: Option<f64>,
    /// Average momentum deviation envelope.
    pub momentum_deviation: f64,
    /// Objective-gap envelope along the whole trajectory.
    pub f_trajectory: Option<f64>,
}

/// A config made concrete: problem built, start point materialized,
/// decay strength and schedule resolved, envelopes precomputed.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub cfg: ExperimentConfig,
    pub problem: Problem,
    pub theta0: ParamVector,
    pub lam: f64,
    /// f(theta0) minus the objective's lower bound.
    pub delta: f64,
    pub tc: Option<TheoryConstants>,
    /// True when all three schedule coefficients were defaulted.
    pub balanced: bool,
    pub lion: LionConfig,
    pub bounds: BoundSet,
    pub config_hash: String,
}

/// One seed's trajectory: logged step diagnostics plus whole-run
/// aggregates. A divergent run is a recorded outcome, not an error; it
/// keeps every step up to the failure and carries a diagnostic.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub run_id: String,
    pub seed: u64,
    pub logged: Vec<StepMetrics>,
    pub aggregates: RunAggregates,
    pub aborted: Option<String>,
}

/// Seed-level summary of an experiment, one row per config.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub config_hash: String,
    pub n_seeds: u64,
    pub k: u64,
    pub d: usize,
    pub lambda: f64,
    pub sigma: f64,
    pub mean_avg_kkt_residual: f64,
    pub se_avg_kkt_residual: f64,
    pub mean_avg_grad_l1: f64,
    pub mean_avg_delta: f64,
    pub bounds: BoundSet,
    pub stationarity_lumped_ok: Option<bool>,
    pub stationarity_full_ok: Option<bool>,
    pub momentum_deviation_ok: bool,
    pub f_trajectory_ok: Option<bool>,
    pub mode: Mode,
    pub mean_max_f_gap: f64,
    pub n_aborted: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub resolved: ResolvedExperiment,
    pub records: Vec<RunRecord>,
    pub summary: SummaryRow,
}

/// Paired seed-mean trajectories of the sign-momentum method and plain
/// SGD under shared noise streams.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub k: u64,
    pub lion_f: f64,
    pub lion_grad_l1: f64,
    pub sgd_f: f64,
    pub sgd_grad_l1: f64,
}

#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub resolved: ResolvedExperiment,
    pub sgd_eta: f64,
    pub rows: Vec<CompareRow>,
}

fn theory_constants(cfg: &ExperimentConfig, problem: &Problem, delta: f64) -> Result<(Option<TheoryConstants>, bool)> {
    match &cfg.schedule {
        ScheduleSpec::Manual { .. } => Ok((None, false)),
        ScheduleSpec::Theory { c1, c2, c3 } => {
            if !(delta > 0.0) {
                return Err(LionError::Config(
                    "the theory schedule needs f(theta0) strictly above the objective floor; \
                     start away from the minimizer"
                        .into(),
                ));
            }
            let l = problem.smoothness_l();
            let all_given = c1.is_some() && c2.is_some() && c3.is_some();
            let tc = if all_given {
                TheoryConstants::new(c1.unwrap(), c2.unwrap(), c3.unwrap(), delta, l, cfg.sigma)?
            } else {
                let bal = TheoryConstants::balanced(l, delta, cfg.sigma)?;
                TheoryConstants::new(
                    c1.unwrap_or(bal.c1),
                    c2.unwrap_or(bal.c2),
                    c3.unwrap_or(bal.c3),
                    delta,
                    l,
                    cfg.sigma,
                )?
            };
            let balanced = c1.is_none() && c2.is_none() && c3.is_none();
            Ok((Some(tc), balanced))
        }
    }
}

fn bound_set(
    tc: Option<&TheoryConstants>,
    balanced: bool,
    lion: &LionConfig,
    problem: &Problem,
    sigma: f64,
    k: u64,
) -> BoundSet {
    let d = problem.dim();
    let l = problem.smoothness_l();
    BoundSet {
        stationarity_lumped: tc.and_then(|tc| {
            balanced.then(|| balanced_stationarity_bound(l, tc.delta, tc.sigma, k, d))
        }),
        stationarity_full: tc.map(|tc| stationarity_bound(tc, k, d)),
        momentum_deviation: momentum_error_bound(l, sigma, d, lion),
        f_trajectory: tc.map(f_trajectory_bound),
    }
}

/// Compatibility rules that involve the concrete problem, start point,
/// and schedule together. Every rejection is a config error.
fn check_geometry(
    mode: Mode,
    lam: f64,
    lion: &LionConfig,
    problem: &Problem,
    theta0: &ParamVector,
) -> Result<()> {
    if lam > 0.0 && lion.eta * lam > 1.0 {
        return Err(LionError::Config(format!(
            "eta * lambda = {} exceeds 1; the decay box is not forward invariant",
            lion.eta * lam
        )));
    }
    if mode == Mode::Constrained {
        let linf = theta0.norm_linf()?;
        if linf > 1.0 / lam {
            return Err(LionError::Config(format!(
                "start point infeasible: ||theta0||_inf = {linf} exceeds 1/lambda = {}",
                1.0 / lam
            )));
        }
    }
    if let Some(r) = problem.domain_radius() {
        if mode != Mode::Constrained {
            return Err(LionError::Config(format!(
                "{} is certified only on a box; run it constrained with 1/lambda <= {r}",
                problem.name()
            )));
        }
        if 1.0 / lam > r {
            return Err(LionError::Config(format!(
                "feasible box 1/lambda = {} pokes outside the certified radius {r}",
                1.0 / lam
            )));
        }
    }
    Ok(())
}

/// Turns a config into a runnable experiment or explains why it cannot
/// run. Evaluating f at the start point doubles as a domain check.
pub fn resolve(cfg: &ExperimentConfig) -> Result<ResolvedExperiment> {
    cfg.validate()?;
    let problem = cfg.problem.build(None)?;
    let theta0 = cfg.init.materialize(problem.dim())?;
    let f0 = problem.eval_f(&theta0)?;
    let delta = f0 - problem.f_star_lower();
    let (tc, balanced) = theory_constants(cfg, &problem, delta)?;

    let lam = match (cfg.mode, cfg.lambda) {
        (_, LambdaSpec::Fixed(v)) => v,
        (Mode::Unconstrained, LambdaSpec::Auto) => {
            let tc = tc
                .as_ref()
                .expect("validate guarantees theory schedule for auto lambda");
            choose_lambda_unconstrained(&problem, tc)?
        }
        (Mode::Constrained, LambdaSpec::Auto) => {
            unreachable!("validate rejects constrained auto lambda")
        }
    };

    let lion = match (&cfg.schedule, &tc) {
        (ScheduleSpec::Theory { .. }, Some(tc)) => {
            if balanced {
                let floor = tc.min_budget()?;
                if cfg.k < floor {
                    return Err(LionError::Budget(format!(
                        "balanced coefficients certify nothing below k = {floor}; got k = {}",
                        cfg.k
                    )));
                }
            }
            tc.instantiate(cfg.k, problem.dim(), lam)?
        }
        (ScheduleSpec::Manual { beta1, beta2, eta }, None) => {
            let lion = LionConfig {
                beta1: *beta1,
                beta2: *beta2,
                eta: *eta,
                lam,
                k: cfg.k,
            };
            lion.validate()?;
            lion
        }
        _ => unreachable!("schedule and constants always agree"),
    };

    check_geometry(cfg.mode, lam, &lion, &problem, &theta0)?;
    let bounds = bound_set(tc.as_ref(), balanced, &lion, &problem, cfg.sigma, cfg.k);
    let config_hash = cfg.config_hash();
    Ok(ResolvedExperiment {
        cfg: cfg.clone(),
        problem,
        theta0,
        lam,
        delta,
        tc,
        balanced,
        lion,
        bounds,
        config_hash,
    })
}

/// Resolution for one sweep cell: the dimension may differ from the
/// config while the schedule coefficients and decay strength stay fixed
/// across the whole sweep. Only the per-step scaling (eta, betas) is
/// re-derived for the cell's budget and dimension.
pub(crate) fn resolve_cell(
    cfg: &ExperimentConfig,
    k: u64,
    d: usize,
    tc: &TheoryConstants,
    lam: f64,
    balanced: bool,
) -> Result<ResolvedExperiment> {
    let problem = cfg.problem.build(Some(d))?;
    let theta0 = cfg.init.materialize(d)?;
    let f0 = problem.eval_f(&theta0)?;
    let delta = f0 - problem.f_star_lower();
    if balanced {
        let floor = tc.min_budget()?;
        if k < floor {
            return Err(LionError::Budget(format!(
                "sweep cell k = {k} sits below the balanced budget floor {floor}"
            )));
        }
    }
    let lion = tc.instantiate(k, d, lam)?;
    check_geometry(cfg.mode, lam, &lion, &problem, &theta0)?;
    let bounds = bound_set(Some(tc), balanced, &lion, &problem, cfg.sigma, k);
    let mut cell_cfg = cfg.clone();
    cell_cfg.k = k;
    cell_cfg.problem.d = d;
    cell_cfg.sweep = None;
    let config_hash = cell_cfg.config_hash();
    Ok(ResolvedExperiment {
        cfg: cell_cfg,
        problem,
        theta0,
        lam,
        delta,
        tc: Some(*tc),
        balanced,
        lion,
        bounds,
        config_hash,
    })
}

/// One deterministic trajectory. Diagnostics are measured at the
/// pre-update iterate from the exact gradient; the optimizer consumes an
/// independent noisy sample. Aggregates cover every step regardless of
/// log thinning; the final step is always logged.
pub fn run_single(rr: &ResolvedExperiment, seed: u64) -> Result<RunRecord> {
    let run_id = format!("{}-s{seed:04}", rr.config_hash);
    let noise = NoiseModel::new(rr.cfg.sigma, rr.cfg.noise)?;
    let mut oracle = GradOracle::new(&rr.problem, noise, seed);

    // First-sample init reuses the very first draw as both the initial
    // momentum and the first step's gradient, so the first direction is
    // exactly that sample.
    let (mut state, mut pending_first) = match rr.cfg.momentum_init {
        MomentumInit::FirstSample => {
            let g1 = oracle.sample_grad(&rr.theta0)?;
            (LionState::new(rr.theta0.clone(), g1.clone())?, Some(g1))
        }
        MomentumInit::Zero => (LionState::zero_momentum(rr.theta0.clone()), None),
    };

    let mut acc = RunningAggregates::new();
    let mut logged: Vec<StepMetrics> = Vec::new();
    let mut last_metrics: Option<StepMetrics> = None;
    let mut aborted = None;
    for k in 1..=rr.cfg.k {
        let attempt = (|| -> Result<(StepMetrics, LionState)> {
            let f = rr.problem.eval_f(&state.theta)?;
            let exact = rr.problem.eval_grad(&state.theta)?;
            let g = match pending_first.take() {
                Some(first) => first,
                None => oracle.sample_grad(&state.theta)?,
            };
            let (next, direction) = lion_step(&rr.lion, &state, &g)?;
            let metrics = StepMetrics::from_parts(k, f, &state.theta, &exact, &direction, rr.lam)?;
            Ok((metrics, next))
        })();
        match attempt {
            Ok((metrics, next)) => {
                acc.push(&metrics);
                if (k - 1) % rr.cfg.log_every == 0 || k == rr.cfg.k {
                    logged.push(metrics.clone());
                }
                last_metrics = Some(metrics);
                state = next;
            }
            Err(err) => {
                aborted = Some(format!("step {k}: {err}"));
                break;
            }
        }
    }
    if acc.is_empty() {
        return Err(LionError::NonFinite(format!(
            "run {run_id} produced no finite step: {}",
            aborted.unwrap_or_else(|| "empty budget".into())
        )));
    }
    // an aborted run must still show its last finite step, which the
    // thinning stride may have skipped
    if aborted.is_some() {
        if let Some(last) = last_metrics {
            if logged.last().map(|s| s.k) != Some(last.k) {
                logged.push(last);
            }
        }
    }
    let aggregates = acc.finish()?;
    Ok(RunRecord {
        run_id,
        seed,
        logged,
        aggregates,
        aborted,
    })
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Collapses seed records into one summary row. Aborted runs are counted
/// but excluded from the means; a summary over zero completed runs is an
/// error rather than a row of NaNs.
pub fn summarize(rr: &ResolvedExperiment, records: &[RunRecord]) -> Result<SummaryRow> {
    let complete: Vec<&RunRecord> = records.iter().filter(|r| r.aborted.is_none()).collect();
    if complete.is_empty() {
        return Err(LionError::NonFinite(
            "every seed aborted; nothing to summarize".into(),
        ));
    }
    let col = |f: &dyn Fn(&RunAggregates) -> f64| -> Vec<f64> {
        complete.iter().map(|r| f(&r.aggregates)).collect()
    };
    let (mean_avg_kkt_residual, se_avg_kkt_residual) = mean_and_se(&col(&|a| a.avg_kkt_residual));
    let (mean_avg_grad_l1, _) = mean_and_se(&col(&|a| a.avg_grad_l1));
    let (mean_avg_delta, _) = mean_and_se(&col(&|a| a.avg_delta_l2));
    let f_star = rr.problem.f_star_lower();
    let (mean_max_f_gap, _) = mean_and_se(&col(&|a| a.max_f - f_star));

    // The stationarity certificates cover the KKT residual in constrained
    // mode and half the l1 gradient norm in unconstrained mode.
    let stationarity_lhs = match rr.cfg.mode {
        Mode::Constrained => mean_avg_kkt_residual,
        Mode::Unconstrained => mean_avg_grad_l1 / 2.0,
    };
    let b = rr.bounds;
    Ok(SummaryRow {
        config_hash: rr.config_hash.clone(),
        n_seeds: records.len() as u64,
        k: rr.cfg.k,
        d: rr.problem.dim(),
        lambda: rr.lam,
        sigma: rr.cfg.sigma,
        mean_avg_kkt_residual,
        se_avg_kkt_residual,
        mean_avg_grad_l1,
        mean_avg_delta,
        bounds: b,
        stationarity_lumped_ok: b.stationarity_lumped.map(|v| stationarity_lhs <= v),
        stationarity_full_ok: b.stationarity_full.map(|v| stationarity_lhs <= v),
        momentum_deviation_ok: mean_avg_delta <= b.momentum_deviation,
        f_trajectory_ok: b.f_trajectory.map(|v| mean_max_f_gap <= v),
        mode: rr.cfg.mode,
        mean_max_f_gap,
        n_aborted: (records.len() - complete.len()) as u64,
    })
}

/// Runs every seed in parallel and summarizes, writing nothing.
pub fn run_experiment_in_memory(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let resolved = resolve(cfg)?;
    let records = run_seeds(&resolved)?;
    let summary = summarize(&resolved, &records)?;
    Ok(ExperimentOutput {
        resolved,
        records,
        summary,
    })
}

pub(crate) fn run_seeds(resolved: &ResolvedExperiment) -> Result<Vec<RunRecord>> {
    resolved
        .cfg
        .seeds
        .par_iter()
        .map(|&seed| run_single(resolved, seed))
        .collect()
}

/// Runs the experiment and writes its artifacts under the config's
/// output directory: one per-step CSV per seed under runs/, summary.csv,
/// and a meta.txt sidecar. The sidecar is the only artifact carrying a
/// timestamp, so repeated invocations produce byte-identical CSVs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let out = run_experiment_in_memory(cfg)?;
    let dir = &cfg.out_dir;
    let runs_dir = dir.join("runs");
    std::fs::create_dir_all(&runs_dir)?;
    for record in &out.records {
        csvio::write_run_csv(&runs_dir.join(format!("{}.csv", record.run_id)), record)?;
    }
    csvio::write_summary_csv(&dir.join("summary.csv"), &out.summary)?;
    csvio::write_meta(&dir.join("meta.txt"), &out.resolved.config_hash)?;
    Ok(out)
}

struct Trajectory {
    f: Vec<f64>,
    grad_l1: Vec<f64>,
}

fn sgd_trajectory(rr: &ResolvedExperiment, eta: f64, seed: u64) -> Result<Trajectory> {
    let noise = NoiseModel::new(rr.cfg.sigma, rr.cfg.noise)?;
    let mut oracle = GradOracle::new(&rr.problem, noise, seed);
    let mut theta = rr.theta0.clone();
    let k_total = rr.cfg.k;
    let mut f = Vec::with_capacity(k_total as usize);
    let mut grad_l1 = Vec::with_capacity(k_total as usize);
    for k in 1..=k_total {
        let fv = rr.problem.eval_f(&theta).map_err(|e| {
            LionError::NonFinite(format!("sgd baseline left the finite range at step {k}: {e}"))
        })?;
        let exact = rr.problem.eval_grad(&theta)?;
        f.push(fv);
        grad_l1.push(exact.norm_l1()?);
        let g = oracle.sample_grad(&theta)?;
        theta = sgd_step(eta, &theta, &g)?;
    }
    Ok(Trajectory { f, grad_l1 })
}

/// Paired-run comparison against plain SGD. Both methods start from the
/// same point and consume identical noise streams seed for seed; the
/// baseline step size defaults to the sign-momentum step scaled by
/// sqrt(d), which matches the two methods' per-step displacement.
pub fn run_baseline_comparison(cfg: &ExperimentConfig) -> Result<CompareOutput> {
    let resolved = resolve(cfg)?;
    let d = resolved.problem.dim() as f64;
    let sgd_eta = cfg.sgd_eta.unwrap_or(resolved.lion.eta * d.sqrt());
    SgdConfig {
        eta: sgd_eta,
        k: cfg.k,
    }
    .validate()?;

    let pairs: Vec<(Trajectory, Trajectory)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> Result<(Trajectory, Trajectory)> {
            let record = run_single(&resolved, seed)?;
            if let Some(diag) = record.aborted {
                return Err(LionError::NonFinite(format!(
                    "comparison needs complete trajectories; run {} aborted: {diag}",
                    record.run_id
                )));
            }
            // Comparison trajectories need every step regardless of the
            // config's log thinning.
            let lion = if resolved.cfg.log_every == 1 {
                Trajectory {
                    f: record.logged.iter().map(|s| s.f).collect(),
                    grad_l1: record.logged.iter().map(|s| s.grad_l1).collect(),
                }
            } else {
                let mut dense = resolved.clone();
                dense.cfg.log_every = 1;
                let record = run_single(&dense, seed)?;
                Trajectory {
                    f: record.logged.iter().map(|s| s.f).collect(),
                    grad_l1: record.logged.iter().map(|s| s.grad_l1).collect(),
                }
            };
            let sgd = sgd_trajectory(&resolved, sgd_eta, seed)?;
            Ok((lion, sgd))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = pairs.len() as f64;
    let k_total = cfg.k as usize;
    let mut rows = Vec::with_capacity(k_total);
    for i in 0..k_total {
        let mut row = CompareRow {
            k: (i + 1) as u64,
            lion_f: 0.0,
            lion_grad_l1: 0.0,
            sgd_f: 0.0,
            sgd_grad_l1: 0.0,
        };
        for (lion, sgd) in &pairs {
            row.lion_f += lion.f[i];
            row.lion_grad_l1 += lion.grad_l1[i];
            row.sgd_f += sgd.f[i];
            row.sgd_grad_l1 += sgd.grad_l1[i];
        }
        row.lion_f /= n;
        row.lion_grad_l1 /= n;
        row.sgd_f /= n;
        row.sgd_grad_l1 /= n;
        rows.push(row);
    }
    Ok(CompareOutput {
        resolved,
        sgd_eta,
        rows,
    })
}

/// Writes compare.csv and compare.svg for a finished comparison.
pub fn write_comparison(out: &CompareOutput) -> Result<()> {
    let dir = &out.resolved.cfg.out_dir;
    std::fs::create_dir_all(dir)?;
    csvio::write_compare_csv(&dir.join("compare.csv"), &out.rows)?;
    let series = |label: &str, pick: &dyn Fn(&CompareRow) -> f64| Series {
        label: label.to_string(),
        points: out.rows.iter().map(|r| (r.k as f64, pick(r))).collect(),
        dashed: false,
    };
    let chart = ChartSpec {
        title: format!(
            "sign-momentum vs sgd on {} (d = {})",
            out.resolved.problem.name(),
            out.resolved.problem.dim()
        ),
        x_label: "step".into(),
        y_label: "seed mean".into(),
        log_x: true,
        log_y: true,
        series: vec![
            series("lion f", &|r| r.lion_f),
            series("sgd f", &|r| r.sgd_f),
            series("lion |grad|_1", &|r| r.lion_grad_l1),
            series("sgd |grad|_1", &|r| r.sgd_grad_l1),
        ],
    };
    std::fs::write(dir.join("compare.svg"), render_chart(&chart)?)?;
    csvio::write_meta(&dir.join("meta.txt"), &out.resolved.config_hash)?;
    Ok(())
}

/// Convenience check used by callers deciding exit status: true when any
/// certificate that applies to this run failed.
pub fn any_certificate_failed(summary: &SummaryRow) -> bool {
    summary.stationarity_lumped_ok == Some(false)
        || summary.stationarity_full_ok == Some(false)
        || !summary.momentum_deviation_ok
        || summary.f_trajectory_ok == Some(false)
}

/// True when a constrained run strayed outside its box by more than the
/// feasibility slack. Included in the certificate gate.
pub fn feasibility_violated(records: &[RunRecord], lam: f64) -> bool {
    lam > 0.0
        && records.iter().any(|r| {
            r.aggregates.max_theta_linf > 1.0 / lam + FEASIBILITY_SLACK
        })
}
