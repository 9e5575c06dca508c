//! Rate sweeps. A K-sweep re-derives the whole schedule at each budget
//! from the same problem constants; a d-sweep holds the schedule
//! coefficients and decay strength fixed at the values resolved for the
//! configured base dimension so the bound column stays an exact power
//! law in d. Cells run in ascending axis order, seeds in parallel
//! within each cell, so the gathered points are deterministic.

use crate::error::{LionError, Result};
use crate::harness::config::{ExperimentConfig, Mode};
use crate::harness::runner::{resolve, resolve_cell, run_seeds, ResolvedExperiment, RunRecord};
use crate::ratefit::{SweepAxis, SweepPoint, SweepResult};

/// The per-run scalar a sweep tracks: the average KKT residual in
/// constrained mode, the average l1 gradient norm in unconstrained
/// mode. The matching certified level for the latter is twice the
/// stationarity bound, since the certificate covers half the l1 norm.
fn cell_metric(mode: Mode, record: &RunRecord) -> f64 {
    match mode {
        Mode::Constrained => record.aggregates.avg_kkt_residual,
        Mode::Unconstrained => record.aggregates.avg_grad_l1,
    }
}

fn cell_bound(mode: Mode, rr: &ResolvedExperiment) -> Result<f64> {
    let lumped = rr.bounds.stationarity_lumped.ok_or_else(|| {
        LionError::Config(
            "sweeps need the balanced theory coefficients so every cell carries a certified level"
                .into(),
        )
    })?;
    Ok(match mode {
        Mode::Constrained => lumped,
        Mode::Unconstrained => 2.0 * lumped,
    })
}

fn cell_point(rr: &ResolvedExperiment, axis_value: f64, with_ratio: bool) -> Result<SweepPoint> {
    let records = run_seeds(rr)?;
    if let Some(bad) = records.iter().find(|r| r.aborted.is_some()) {
        return Err(LionError::NonFinite(format!(
            "sweep cell at {axis_value} aborted in run {}: {}",
            bad.run_id,
            bad.aborted.as_deref().unwrap_or("unknown")
        )));
    }
    let metrics: Vec<f64> = records
        .iter()
        .map(|r| cell_metric(rr.cfg.mode, r))
        .collect();
    let n = metrics.len() as f64;
    let mean = metrics.iter().sum::<f64>() / n;
    let std_error = if metrics.len() < 2 {
        0.0
    } else {
        let var = metrics.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    };
    let mean_ratio = if with_ratio {
        let ratios: Vec<f64> = records
            .iter()
            .filter_map(|r| r.aggregates.mean_ratio)
            .collect();
        (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64)
    } else {
        None
    };
    Ok(SweepPoint {
        axis_value,
        mean_metric: mean,
        std_error,
        bound_value: cell_bound(rr.cfg.mode, rr)?,
        mean_ratio,
    })
}

/// Runs the configured budgets with the schedule re-derived per budget.
pub fn run_k_sweep(cfg: &ExperimentConfig, k_values: &[u64]) -> Result<SweepResult> {
    if !cfg.schedule.is_theory() {
        return Err(LionError::Config(
            "sweeps require the theory schedule".into(),
        ));
    }
    let mut values = k_values.to_vec();
    values.sort_unstable();
    let mut points = Vec::with_capacity(values.len());
    for &k in &values {
        let mut cell_cfg = cfg.clone();
        cell_cfg.k = k;
        cell_cfg.sweep = None;
        let rr = resolve(&cell_cfg)?;
        points.push(cell_point(&rr, k as f64, false)?);
    }
    SweepResult::from_points(SweepAxis::K, points)
}

/// Runs the configured dimensions at a fixed budget. The schedule
/// coefficients, decay strength, and envelope constants come from
/// resolving the base config once, so across cells only the dimension
/// scaling moves. The gradient norm ratio is tracked per cell.
pub fn run_d_sweep(cfg: &ExperimentConfig, d_values: &[u64]) -> Result<SweepResult> {
    if !cfg.schedule.is_theory() {
        return Err(LionError::Config(
            "sweeps require the theory schedule".into(),
        ));
    }
    let base = resolve(cfg)?;
    let tc = base
        .tc
        .expect("theory schedule always resolves its constants");
    let mut values = d_values.to_vec();
    values.sort_unstable();
    let mut points = Vec::with_capacity(values.len());
    for &d in &values {
        let rr = resolve_cell(cfg, cfg.k, d as usize, &tc, base.lam, base.balanced)?;
        points.push(cell_point(&rr, d as f64, true)?);
    }
    SweepResult::from_points(SweepAxis::D, points)
}

/// Dispatches on the config's [sweep] section.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| LionError::Config("a sweep needs the [sweep] section".into()))?;
    match spec.axis {
        SweepAxis::K => run_k_sweep(cfg, &spec.values),
        SweepAxis::D => run_d_sweep(cfg, &spec.values),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;

    fn sweep_cfg(extra: &str) -> ExperimentConfig {
        let text = format!(
            "\
[problem]
name = quadratic
d = 6

[run]
mode = constrained
lambda = 1.0
k = 400
sigma = 1.0
seeds = 4
base_seed = 1

[schedule]
mode = theory
{extra}
"
        );
        ExperimentConfig::parse(&text).unwrap()
    }

    #[test]
    fn k_sweep_points_follow_the_axis() {
        let cfg = sweep_cfg("");
        let sweep = run_k_sweep(&cfg, &[10000, 100, 1000, 400]).unwrap();
        assert_eq!(sweep.points.len(), 4);
        let axis: Vec<f64> = sweep.points.iter().map(|p| p.axis_value).collect();
        assert_eq!(axis, vec![100.0, 400.0, 1000.0, 10000.0]);
        // the certified level is an exact quarter-power of the budget
        assert!((sweep.bound_fit.slope + 0.25).abs() < 1e-12);
        assert!((sweep.bound_fit.r_squared - 1.0).abs() < 1e-12);
        // identical problem constants at every cell keep the metric
        // below the certified level here
        assert!(sweep.metric_below_bound());
        for p in &sweep.points {
            assert!(p.mean_ratio.is_none());
        }
    }

    #[test]
    fn k_sweep_is_deterministic() {
        let cfg = sweep_cfg("");
        let a = run_k_sweep(&cfg, &[100, 400, 1000, 10000]).unwrap();
        let b = run_k_sweep(&cfg, &[100, 400, 1000, 10000]).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn d_sweep_holds_coefficients_and_tracks_ratio() {
        let cfg = sweep_cfg("");
        let sweep = run_d_sweep(&cfg, &[4, 16, 64, 256]).unwrap();
        assert_eq!(sweep.points.len(), 4);
        // certified level scales exactly like sqrt(d)
        assert!((sweep.bound_fit.slope - 0.5).abs() < 1e-12);
        let ratio_fit = sweep.ratio_fit.expect("d sweeps track the norm ratio");
        // the ratio grows with dimension at a near square-root rate
        assert!(ratio_fit.slope > 0.3, "slope {}", ratio_fit.slope);
        for p in &sweep.points {
            let r = p.mean_ratio.expect("ratio defined on noisy runs");
            assert!(r >= 1.0 && r <= (p.axis_value).sqrt() + 1e-9);
        }
    }

    #[test]
    fn manual_schedule_cannot_sweep() {
        let mut cfg = sweep_cfg("");
        cfg.schedule = crate::harness::config::ScheduleSpec::Manual {
            beta1: 0.9,
            beta2: 0.99,
            eta: 0.001,
        };
        assert!(run_k_sweep(&cfg, &[100, 1000, 10000, 100000]).is_err());
    }

    #[test]
    fn pinned_coefficients_refuse_sweeps() {
        // explicit c's have no lumped certificate, so cells cannot carry one
        let cfg = sweep_cfg("c1 = 1.0\nc2 = 1.0\nc3 = 1.0");
        let err = run_k_sweep(&cfg, &[100, 400, 1000, 10000]).unwrap_err();
        assert!(err.to_string().contains("balanced"));
    }

    #[test]
    fn dispatch_needs_a_sweep_section() {
        let cfg = sweep_cfg("");
        assert!(run_sweep(&cfg).is_err());
    }
}
