//! Power-law slope estimation for budget and dimension sweeps.
//!
//! The certified envelope decays like `sqrt(d) / K^(1/4)`, so log-log
//! least squares over a K-sweep must recover slope -1/4 on the bound
//! column exactly, and the d-sweep bound column slope +1/2. Empirical
//! metric columns get one-sided gates (they are only certified to sit
//! below the bound, and typically decay faster).

use crate::error::{LionError, Result};

/// Least-squares line in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    /// Fitted value at `x`, back on the linear scale.
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Ordinary least squares on (ln x, ln y). Exact for exact power laws.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(LionError::InvalidInput(
            "log-log fit needs at least 2 points".into(),
        ));
    }
    for &(x, y) in points {
        if !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(LionError::InvalidInput(format!(
                "log-log fit needs finite positive values, got ({x}, {y})"
            )));
        }
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|&(x, _)| x.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|&(_, y)| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(ly.iter()).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(LionError::InvalidInput(
            "log-log fit needs at least two distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(ly.iter())
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    // flat data perfectly fit by a flat line: define r^2 = 1
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Which quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Step budget, schedule re-derived per point.
    K,
    /// Problem dimension, budget held constant.
    D,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::K => "K",
            SweepAxis::D => "d",
        }
    }

    fn min_points(&self) -> usize {
        match self {
            SweepAxis::K => 4,
            SweepAxis::D => 3,
        }
    }

    fn min_decades(&self) -> f64 {
        match self {
            SweepAxis::K => 2.0,
            SweepAxis::D => 1.5,
        }
    }
}

/// One sweep cell: seed-mean metric with its standard error, the matching
/// certified bound, and (d-sweeps) the seed-mean gradient norm ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub mean_metric: f64,
    pub std_error: f64,
    pub bound_value: f64,
    pub mean_ratio: Option<f64>,
}

/// A completed sweep: points in ascending axis order plus the fits over
/// the metric, bound, and (when tracked) ratio columns. Storing the bound
/// per point keeps the "empirical below bound" comparison recomputable
/// from the rows alone.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub metric_fit: PowerLawFit,
    pub bound_fit: PowerLawFit,
    pub ratio_fit: Option<PowerLawFit>,
}

impl SweepResult {
    pub fn from_points(axis: SweepAxis, points: Vec<SweepPoint>) -> Result<Self> {
        if points.len() < axis.min_points() {
            return Err(LionError::InvalidInput(format!(
                "{} sweep needs at least {} points, got {}",
                axis.label(),
                axis.min_points(),
                points.len()
            )));
        }
        let mut values: Vec<f64> = points.iter().map(|p| p.axis_value).collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("axis values are finite"));
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LionError::InvalidInput(
                "sweep axis values must be distinct".into(),
            ));
        }
        let span = (values[values.len() - 1] / values[0]).log10();
        if span < axis.min_decades() - 1e-12 {
            return Err(LionError::InvalidInput(format!(
                "{} sweep spans {span:.2} decades, needs at least {}",
                axis.label(),
                axis.min_decades()
            )));
        }
        let metric_pts: Vec<(f64, f64)> =
            points.iter().map(|p| (p.axis_value, p.mean_metric)).collect();
        let bound_pts: Vec<(f64, f64)> =
            points.iter().map(|p| (p.axis_value, p.bound_value)).collect();
        let metric_fit = fit_loglog(&metric_pts)?;
        let bound_fit = fit_loglog(&bound_pts)?;
        let ratio_pts: Vec<(f64, f64)> = points
            .iter()
            .filter_map(|p| p.mean_ratio.map(|r| (p.axis_value, r)))
            .collect();
        let ratio_fit = if ratio_pts.len() == points.len() {
            Some(fit_loglog(&ratio_pts)?)
        } else if ratio_pts.is_empty() {
            None
        } else {
            return Err(LionError::InvalidInput(
                "ratio column must be tracked at every point or none".into(),
            ));
        };
        Ok(Self {
            axis,
            points,
            metric_fit,
            bound_fit,
            ratio_fit,
        })
    }

    /// True when every cell's mean metric sits at or below its bound.
    pub fn metric_below_bound(&self) -> bool {
        self.points.iter().all(|p| p.mean_metric <= p.bound_value)
    }
}
