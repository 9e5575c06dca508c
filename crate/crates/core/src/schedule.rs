//! Budget-indexed hyperparameter schedules.
//!
//! Given problem constants (smoothness `L`, initial gap `delta`, noise
//! level `sigma`) and a step budget `K`, the schedule
//!
//! ```text
//! beta1 = 1 - c1 / sqrt(K)
//! beta2 = 1 - c2 / sqrt(K)
//! eta   = c3 / (sqrt(d) * K^(3/4))
//! ```
//!
//! drives the averaged stationarity residual to zero like
//! `sqrt(d) / K^(1/4)`. The default constants `c1 = c2 = sqrt(L delta) /
//! sigma`, `c3 = delta^(3/4) / (L^(1/4) sigma^(1/2))` balance the error
//! terms; they require a budget floor `min_budget` to keep the momentum
//! weights in `[0, 1)`.

use crate::error::{LionError, Result};
use crate::metrics::f_trajectory_bound;
use crate::optim::LionConfig;
use crate::problems::Problem;

/// Problem constants plus the schedule coefficients derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Initial objective gap f(theta_1) - f_star.
    pub delta: f64,
    /// Gradient Lipschitz constant.
    pub smoothness_l: f64,
    /// Noise level: E||g - grad f||^2 <= sigma^2.
    pub sigma: f64,
}

impl TheoryConstants {
    pub fn new(c1: f64, c2: f64, c3: f64, delta: f64, smoothness_l: f64, sigma: f64) -> Result<Self> {
        let tc = Self {
            c1,
            c2,
            c3,
            delta,
            smoothness_l,
            sigma,
        };
        tc.validate()?;
        Ok(tc)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(LionError::Config(format!("{name} = {v} must be finite and > 0")));
            }
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(LionError::Config(format!(
                "delta = {} must be finite and > 0",
                self.delta
            )));
        }
        if !(self.smoothness_l > 0.0) || !self.smoothness_l.is_finite() {
            return Err(LionError::Config(format!(
                "smoothness constant {} must be finite and > 0",
                self.smoothness_l
            )));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(LionError::Config(format!(
                "sigma = {} must be finite and >= 0",
                self.sigma
            )));
        }
        Ok(())
    }

    /// The balanced default coefficients. Noise must be present: the
    /// coefficients scale like 1/sigma.
    pub fn balanced(smoothness_l: f64, delta: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(LionError::Config(
                "balanced schedule constants need sigma > 0".into(),
            ));
        }
        if !(smoothness_l > 0.0) || !(delta > 0.0) {
            return Err(LionError::Config(
                "balanced schedule constants need smoothness > 0 and delta > 0".into(),
            ));
        }
        let c = (smoothness_l * delta).sqrt() / sigma;
        let c3 = delta.powf(0.75) / (smoothness_l.powf(0.25) * sigma.sqrt());
        Self::new(c, c, c3, delta, smoothness_l, sigma)
    }

    /// Smallest budget for which the balanced coefficients keep both
    /// momentum weights in [0, 1) and the lumped rate constant is valid.
    pub fn min_budget(&self) -> Result<u64> {
        if !(self.sigma > 0.0) {
            return Err(LionError::Config("min budget needs sigma > 0".into()));
        }
        let l = self.smoothness_l;
        let d = self.delta;
        let s = self.sigma;
        let a = s.powi(6) / (l.powi(3) * d.powi(3));
        let b = l * d / (s * s);
        Ok((a.max(b).ceil() as u64).max(1))
    }

    /// Concrete hyperparameters for budget `k` in dimension `dim`, with
    /// decoupled decay `lam` passed through.
    pub fn instantiate(&self, k: u64, dim: usize, lam: f64) -> Result<LionConfig> {
        if k == 0 {
            return Err(LionError::Config("step budget k must be >= 1".into()));
        }
        if dim == 0 {
            return Err(LionError::Config("dimension must be >= 1".into()));
        }
        let kf = k as f64;
        let sqrt_k = kf.sqrt();
        let beta1 = 1.0 - self.c1 / sqrt_k;
        let beta2 = 1.0 - self.c2 / sqrt_k;
        if beta1 < 0.0 || beta2 < 0.0 {
            let floor = (self.c1 * self.c1).max(self.c2 * self.c2).ceil();
            return Err(LionError::Config(format!(
                "budget k = {k} is below the floor {floor} = ceil(max(c1^2, c2^2)) \
                 needed to keep momentum weights nonnegative"
            )));
        }
        let eta = self.c3 / ((dim as f64).sqrt() * kf.powf(0.75));
        let cfg = LionConfig {
            beta1,
            beta2,
            eta,
            lam,
            k,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Decay strength for unconstrained problems: small enough that the decay
/// box never clips the trajectory. The objective stays below its
/// trajectory envelope, the problem maps that envelope to a sublevel
/// radius `C`, and `lam = 1 / (2 C)` leaves a factor-2 margin between the
/// reachable set and the box boundary at `1 / lam`.
pub fn choose_lambda_unconstrained(problem: &Problem, tc: &TheoryConstants) -> Result<f64> {
    tc.validate()?;
    let envelope = f_trajectory_bound(tc);
    let radius = problem.sublevel_radius(envelope).ok_or_else(|| {
        LionError::Unsupported(format!(
            "{}: no invertible coercivity bound registered, pick lam explicitly",
            problem.name()
        ))
    })?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(LionError::Config(format!(
            "degenerate sublevel radius {radius} for envelope {envelope}"
        )));
    }
    Ok(1.0 / (2.0 * radius))
}
