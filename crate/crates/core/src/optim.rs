//! The sign-momentum update and the plain SGD step used as a baseline.
//!
//! One iteration with gradient sample `g`:
//!
//! ```text
//! c      = beta1 * m + (1 - beta1) * g     interpolated direction
//! theta' = theta - eta * (sign(c) + lam * theta)
//! m'     = beta2 * m + (1 - beta2) * g
//! ```
//!
//! With `lam > 0` and `eta * lam <= 1`, the box `||theta||_inf <= 1/lam`
//! is forward-invariant: coordinate-wise
//! `|theta'_i| <= (1 - eta lam) |theta_i| + eta <= 1/lam`.

use crate::error::{LionError, Result};
use crate::vector::ParamVector;

/// Hyperparameters for a fixed-budget run of the sign-momentum method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LionConfig {
    /// Interpolation weight for the update direction.
    pub beta1: f64,
    /// Decay of the momentum buffer.
    pub beta2: f64,
    /// Step size.
    pub eta: f64,
    /// Decoupled weight-decay strength; 0 disables the decay term.
    pub lam: f64,
    /// Total number of steps the schedule was derived for.
    pub k: u64,
}

impl LionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&beta) || !beta.is_finite() {
                return Err(LionError::Config(format!(
                    "{name} = {beta} must lie in [0, 1)"
                )));
            }
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(LionError::Config(format!(
                "eta = {} must be finite and > 0",
                self.eta
            )));
        }
        if !(self.lam >= 0.0) || !self.lam.is_finite() {
            return Err(LionError::Config(format!(
                "lam = {} must be finite and >= 0",
                self.lam
            )));
        }
        if self.k == 0 {
            return Err(LionError::Config("step budget k must be >= 1".into()));
        }
        Ok(())
    }
}

/// Iterate and momentum buffer. `step` counts completed updates.
#[derive(Debug, Clone, PartialEq)]
pub struct LionState {
    pub theta: ParamVector,
    pub m: ParamVector,
    pub step: u64,
}

impl LionState {
    /// Fresh state before any update. Callers that seed the momentum from
    /// the first gradient sample construct the state with that sample as
    /// `m` and then feed the same sample to the first `lion_step`.
    pub fn new(theta: ParamVector, m: ParamVector) -> Result<Self> {
        if theta.dim() != m.dim() {
            return Err(LionError::DimensionMismatch {
                expected: theta.dim(),
                got: m.dim(),
            });
        }
        Ok(Self { theta, m, step: 0 })
    }

    /// State with zero momentum.
    pub fn zero_momentum(theta: ParamVector) -> Self {
        let m = ParamVector::zeros(theta.dim());
        Self { theta, m, step: 0 }
    }
}

/// One sign-momentum update. Returns the new state together with the
/// pre-sign direction `c`, which diagnostics compare against the exact
/// gradient.
pub fn lion_step(cfg: &LionConfig, state: &LionState, g: &ParamVector) -> Result<(LionState, ParamVector)> {
    let d = state.theta.dim();
    if g.dim() != d {
        return Err(LionError::DimensionMismatch {
            expected: d,
            got: g.dim(),
        });
    }
    if !g.is_finite() {
        return Err(LionError::NonFinite("gradient sample".into()));
    }
    let theta = state.theta.as_slice();
    let m = state.m.as_slice();
    let gs = g.as_slice();
    let mut c = Vec::with_capacity(d);
    let mut new_theta = Vec::with_capacity(d);
    let mut new_m = Vec::with_capacity(d);
    for i in 0..d {
        let ci = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gs[i];
        let si = if ci > 0.0 {
            1.0
        } else if ci < 0.0 {
            -1.0
        } else {
            0.0
        };
        new_theta.push(theta[i] - cfg.eta * (si + cfg.lam * theta[i]));
        new_m.push(cfg.beta2 * m[i] + (1.0 - cfg.beta2) * gs[i]);
        c.push(ci);
    }
    let next = LionState {
        theta: ParamVector::from_raw(new_theta),
        m: ParamVector::from_raw(new_m),
        step: state.step + 1,
    };
    if !next.theta.is_finite() || !next.m.is_finite() {
        return Err(LionError::NonFinite("iterate after update".into()));
    }
    Ok((next, ParamVector::from_raw(c)))
}

/// Baseline step-size configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdConfig {
    pub eta: f64,
    pub k: u64,
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(LionError::Config(format!(
                "sgd eta = {} must be finite and > 0",
                self.eta
            )));
        }
        if self.k == 0 {
            return Err(LionError::Config("step budget k must be >= 1".into()));
        }
        Ok(())
    }
}

/// One plain SGD update theta - eta * g.
pub fn sgd_step(eta: f64, theta: &ParamVector, g: &ParamVector) -> Result<ParamVector> {
    if g.dim() != theta.dim() {
        return Err(LionError::DimensionMismatch {
            expected: theta.dim(),
            got: g.dim(),
        });
    }
    let next: Vec<f64> = theta
        .as_slice()
        .iter()
        .zip(g.as_slice().iter())
        .map(|(t, gi)| t - eta * gi)
        .collect();
    let next = ParamVector::from_raw(next);
    if !next.is_finite() {
        return Err(LionError::NonFinite("sgd iterate".into()));
    }
    Ok(next)
}
