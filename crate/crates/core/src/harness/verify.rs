//! Certification battery: one experiment run through every invariant
//! the library promises, reported as pass/fail rows rather than
//! exceptions. A failed check is a finding for the report; callers
//! decide what exit status it deserves.

use crate::error::{LionError, Result};
use crate::harness::config::{ExperimentConfig, Mode, MomentumInit};
use crate::harness::runner::run_experiment_in_memory;
use crate::metrics::FEASIBILITY_SLACK;
use crate::problems::{fd_gradient, max_relative_error, random_box_point, Problem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FD_TOLERANCE: f64 = 1e-5;
const RESIDUAL_FLOOR: f64 = -1e-9;
const BOUNDARY_MARGIN: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct VerifyCheck {
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub config_hash: String,
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Small instances of every problem family, for the oracle checks that
/// do not depend on the experiment's own problem.
fn catalog() -> Result<Vec<Problem>> {
    Ok(vec![
        Problem::quadratic(8, 0.5, 4.0)?,
        Problem::rastrigin_smooth(8, 1.0)?,
        Problem::rosenbrock(8, 2.0)?,
        Problem::logistic(8, 60, 0.1, 7)?,
    ])
}

/// Worst relative disagreement between the analytic gradient and a
/// central finite difference over `trials` interior points.
fn fd_worst_error(problem: &Problem, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // stay clearly inside any certified domain so the difference
    // stencils cannot poke outside it
    let radius = problem.domain_radius().map_or(2.0, |r| 0.9 * r);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let theta = random_box_point(&mut rng, problem.dim(), radius);
        let analytic = problem.eval_grad(&theta)?;
        let numeric = fd_gradient(problem, &theta)?;
        worst = worst.max(max_relative_error(&analytic, &numeric)?);
    }
    Ok(worst)
}

/// Runs the full battery for a theory-schedule experiment:
/// gradient oracles against finite differences, sampled smoothness
/// against the declared constants, then one multi-seed experiment
/// checked against every envelope it certifies.
pub fn verify_suite(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    if !cfg.schedule.is_theory() {
        return Err(LionError::Config(
            "verification runs on the theory schedule; manual schedules certify nothing".into(),
        ));
    }
    if cfg.momentum_init != MomentumInit::FirstSample {
        return Err(LionError::Config(
            "verification requires m0 = first-sample, the initialization the envelopes assume"
                .into(),
        ));
    }

    let mut checks = Vec::new();
    for (idx, problem) in catalog()?.into_iter().enumerate() {
        let worst = fd_worst_error(&problem, 100, 0xfd00 + idx as u64)?;
        checks.push(VerifyCheck {
            name: format!("grad_fd_{}", problem.name()),
            pass: worst < FD_TOLERANCE,
            observed: worst,
            threshold: FD_TOLERANCE,
            detail: "worst relative gap, analytic vs central difference, 100 points".into(),
        });
        let report = problem.certify_smoothness(200, 0x5100 + idx as u64)?;
        checks.push(VerifyCheck {
            name: format!("smoothness_{}", problem.name()),
            pass: report.pass,
            observed: report.max_ratio,
            threshold: report.declared_l,
            detail: "largest sampled gradient-difference ratio vs declared constant".into(),
        });
    }

    let out = run_experiment_in_memory(cfg)?;
    let rr = &out.resolved;
    let records = &out.records;
    let summary = &out.summary;

    let aborted = records.iter().filter(|r| r.aborted.is_some()).count();
    checks.push(VerifyCheck {
        name: "runs_complete".into(),
        pass: aborted == 0,
        observed: aborted as f64,
        threshold: 0.0,
        detail: format!("aborted runs out of {}", records.len()),
    });

    let max_linf = records
        .iter()
        .map(|r| r.aggregates.max_theta_linf)
        .fold(0.0f64, f64::max);
    if rr.lam > 0.0 {
        checks.push(VerifyCheck {
            name: "feasibility".into(),
            pass: max_linf <= 1.0 / rr.lam + FEASIBILITY_SLACK
                && records.iter().all(|r| r.aggregates.all_feasible),
            observed: max_linf,
            threshold: 1.0 / rr.lam + FEASIBILITY_SLACK,
            detail: "largest iterate sup-norm vs the decay box".into(),
        });
    }

    let min_kkt = records
        .iter()
        .map(|r| r.aggregates.min_kkt_residual)
        .fold(f64::INFINITY, f64::min);
    checks.push(VerifyCheck {
        name: "residual_floor".into(),
        pass: min_kkt >= RESIDUAL_FLOOR,
        observed: min_kkt,
        threshold: RESIDUAL_FLOOR,
        detail: "smallest logged residual; negative values signal an infeasible iterate".into(),
    });

    checks.push(VerifyCheck {
        name: "momentum_deviation".into(),
        pass: summary.momentum_deviation_ok,
        observed: summary.mean_avg_delta,
        threshold: rr.bounds.momentum_deviation,
        detail: "seed-mean average direction error vs its envelope".into(),
    });

    if let Some(bound) = rr.bounds.f_trajectory {
        checks.push(VerifyCheck {
            name: "trajectory_envelope".into(),
            pass: summary.f_trajectory_ok == Some(true),
            observed: summary.mean_max_f_gap,
            threshold: bound,
            detail: "seed-mean worst objective gap vs its envelope".into(),
        });
    }

    let stationarity_lhs = match cfg.mode {
        Mode::Constrained => summary.mean_avg_kkt_residual,
        Mode::Unconstrained => summary.mean_avg_grad_l1 / 2.0,
    };
    if let Some(bound) = rr.bounds.stationarity_full {
        checks.push(VerifyCheck {
            name: "stationarity_full".into(),
            pass: stationarity_lhs <= bound,
            observed: stationarity_lhs,
            threshold: bound,
            detail: "seed-mean stationarity measure vs the five-term envelope".into(),
        });
    }
    if let Some(bound) = rr.bounds.stationarity_lumped {
        checks.push(VerifyCheck {
            name: "stationarity_lumped".into(),
            pass: stationarity_lhs <= bound,
            observed: stationarity_lhs,
            threshold: bound,
            detail: "seed-mean stationarity measure vs the lumped rate".into(),
        });
    }

    if cfg.mode == Mode::Unconstrained && rr.lam > 0.0 {
        checks.push(VerifyCheck {
            name: "boundary_avoidance".into(),
            pass: rr.lam * max_linf <= BOUNDARY_MARGIN + FEASIBILITY_SLACK,
            observed: rr.lam * max_linf,
            threshold: BOUNDARY_MARGIN + FEASIBILITY_SLACK,
            detail: "iterates should stay in the inner half of the decay box".into(),
        });
    }

    Ok(VerifyReport {
        config_hash: rr.config_hash.clone(),
        checks,
    })
}
