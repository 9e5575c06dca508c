//! Instrumentation and certified error envelopes.
//!
//! The central diagnostic is the stationarity residual
//! `lam * <grad f, theta> + ||grad f||_1`, which is nonnegative whenever
//! the iterate sits inside the decay box `||theta||_inf <= 1/lam` and
//! vanishes exactly at stationary points of the decayed objective. The
//! bound functions turn schedule constants into concrete numeric
//! envelopes that experiment summaries compare against.

use crate::error::{LionError, Result};
use crate::optim::LionConfig;
use crate::schedule::TheoryConstants;
use crate::vector::ParamVector;

/// Stationarity residual of the decay-regularized problem.
pub fn kkt_residual(grad: &ParamVector, theta: &ParamVector, lam: f64) -> Result<f64> {
    if !(lam >= 0.0) || !lam.is_finite() {
        return Err(LionError::InvalidInput(format!(
            "lam = {lam} must be finite and >= 0"
        )));
    }
    Ok(lam * grad.dot(theta)? + grad.norm_l1()?)
}

/// l1/l2 gradient norm ratio, in [1, sqrt(d)] for nonzero gradients and
/// undefined (None) at zero.
pub fn norm_ratio(grad: &ParamVector) -> Result<Option<f64>> {
    let l2 = grad.norm_l2()?;
    if l2 == 0.0 {
        return Ok(None);
    }
    Ok(Some(grad.norm_l1()? / l2))
}

/// Five-term envelope on the averaged stationarity residual after `k`
/// steps in dimension `dim`, for a run driven by the schedule built from
/// `tc`. Decays like sqrt(dim) / k^(1/4).
pub fn stationarity_bound(tc: &TheoryConstants, k: u64, dim: usize) -> f64 {
    let kf = k as f64;
    let sd = (dim as f64).sqrt();
    let k14 = kf.powf(0.25);
    let l = tc.smoothness_l;
    tc.delta * sd / (tc.c3 * k14)
        + 2.0 * tc.sigma * sd / (tc.c2 * kf.sqrt())
        + 4.0 * l * tc.c3 * sd / (tc.c2 * k14)
        + 2.0 * tc.sigma * (2.0 * tc.c1 + tc.c2) * sd / (tc.c2.sqrt() * k14)
        + 2.0 * l * tc.c3 * sd / kf.powf(0.75)
}

/// Lumped form of `stationarity_bound` for the balanced coefficients,
/// valid once `k` reaches the balanced budget floor:
/// `15 sqrt(dim) (sigma^2 L delta)^(1/4) / k^(1/4)`.
pub fn balanced_stationarity_bound(
    smoothness_l: f64,
    delta: f64,
    sigma: f64,
    k: u64,
    dim: usize,
) -> f64 {
    15.0 * (dim as f64).sqrt() * (sigma * sigma * smoothness_l * delta).powf(0.25)
        / (k as f64).powf(0.25)
}

/// Envelope on the average l2 distance between the update direction and
/// the exact gradient, for a fixed hyperparameter configuration.
pub fn momentum_error_bound(smoothness_l: f64, sigma: f64, dim: usize, cfg: &LionConfig) -> f64 {
    let kf = cfg.k as f64;
    let one_minus_b2 = 1.0 - cfg.beta2;
    let sd = (dim as f64).sqrt();
    sigma / (kf * one_minus_b2)
        + 2.0 * smoothness_l * cfg.eta * sd / one_minus_b2
        + ((cfg.beta1 - cfg.beta2).abs() + (1.0 - cfg.beta1)) * sigma / one_minus_b2.sqrt()
}

/// Budget-free envelope on the objective gap f(theta_k) - f_star along
/// the whole trajectory, for runs driven by the schedule built from `tc`.
pub fn f_trajectory_bound(tc: &TheoryConstants) -> f64 {
    let l = tc.smoothness_l;
    tc.delta
        + 2.0 * tc.c3 * tc.sigma / tc.c2
        + 4.0 * l * tc.c3 * tc.c3 / tc.c2
        + 2.0 * tc.c3 * tc.sigma * (2.0 * tc.c1 + tc.c2) / tc.c2.sqrt()
        + 2.0 * l * tc.c3 * tc.c3
}

/// Dimension-free reference rate `(sigma^2 L delta)^(1/4) / k^(1/4)` that
/// well-tuned SGD attains on the l2 stationarity measure. Shape only:
/// comparisons divide out the constant.
pub fn sgd_reference_rate(smoothness_l: f64, delta: f64, sigma: f64, k: u64) -> f64 {
    (sigma * sigma * smoothness_l * delta).powf(0.25) / (k as f64).powf(0.25)
}

/// Everything measured at one pre-update iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    /// 1-based step index.
    pub k: u64,
    pub f: f64,
    pub grad_l1: f64,
    pub grad_l2: f64,
    /// None when the gradient is exactly zero.
    pub ratio: Option<f64>,
    pub kkt_residual: f64,
    pub theta_linf: f64,
    /// ||direction - grad f||_2 for the direction the step actually used.
    pub delta_l2: f64,
    pub feasible: bool,
}

/// Slack applied to the feasibility check so accumulated rounding at the
/// box boundary does not flip the flag.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

impl StepMetrics {
    /// Assemble the diagnostics for step `k` from the pre-update iterate,
    /// the exact gradient there, and the direction the update used.
    pub fn from_parts(
        k: u64,
        f: f64,
        theta: &ParamVector,
        exact_grad: &ParamVector,
        direction: &ParamVector,
        lam: f64,
    ) -> Result<Self> {
        let grad_l1 = exact_grad.norm_l1()?;
        let grad_l2 = exact_grad.norm_l2()?;
        let theta_linf = theta.norm_linf()?;
        let feasible = lam == 0.0 || theta_linf <= 1.0 / lam + FEASIBILITY_SLACK;
        Ok(Self {
            k,
            f,
            grad_l1,
            grad_l2,
            ratio: if grad_l2 == 0.0 {
                None
            } else {
                Some(grad_l1 / grad_l2)
            },
            kkt_residual: kkt_residual(exact_grad, theta, lam)?,
            theta_linf,
            delta_l2: direction.sub(exact_grad)?.norm_l2()?,
            feasible,
        })
    }
}

/// Whole-run summary statistics. Averages run over every step of the
/// budget, not just the logged subset.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAggregates {
    pub n_steps: u64,
    pub avg_kkt_residual: f64,
    pub min_kkt_residual: f64,
    pub avg_grad_l1: f64,
    pub avg_grad_l2: f64,
    pub avg_delta_l2: f64,
    /// None when the ratio was undefined at every step.
    pub mean_ratio: Option<f64>,
    pub max_theta_linf: f64,
    pub max_f: f64,
    pub final_f: f64,
    pub all_feasible: bool,
}

/// Streaming accumulator behind `RunAggregates`.
#[derive(Debug, Clone, Default)]
pub struct RunningAggregates {
    n: u64,
    sum_kkt: f64,
    min_kkt: f64,
    sum_l1: f64,
    sum_l2: f64,
    sum_delta: f64,
    sum_ratio: f64,
    n_ratio: u64,
    max_linf: f64,
    max_f: f64,
    final_f: f64,
    any_infeasible: bool,
}

impl RunningAggregates {
    pub fn new() -> Self {
        Self {
            max_f: f64::NEG_INFINITY,
            min_kkt: f64::INFINITY,
            ..Self::default()
        }
    }

    pub fn push(&mut self, step: &StepMetrics) {
        self.n += 1;
        self.sum_kkt += step.kkt_residual;
        self.min_kkt = self.min_kkt.min(step.kkt_residual);
        self.sum_l1 += step.grad_l1;
        self.sum_l2 += step.grad_l2;
        self.sum_delta += step.delta_l2;
        if let Some(r) = step.ratio {
            self.sum_ratio += r;
            self.n_ratio += 1;
        }
        self.max_linf = self.max_linf.max(step.theta_linf);
        self.max_f = self.max_f.max(step.f);
        self.final_f = step.f;
        self.any_infeasible |= !step.feasible;
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn finish(self) -> Result<RunAggregates> {
        if self.n == 0 {
            return Err(LionError::InvalidInput(
                "cannot aggregate an empty run".into(),
            ));
        }
        let n = self.n as f64;
        Ok(RunAggregates {
            n_steps: self.n,
            avg_kkt_residual: self.sum_kkt / n,
            min_kkt_residual: self.min_kkt,
            avg_grad_l1: self.sum_l1 / n,
            avg_grad_l2: self.sum_l2 / n,
            avg_delta_l2: self.sum_delta / n,
            mean_ratio: (self.n_ratio > 0).then(|| self.sum_ratio / self.n_ratio as f64),
            max_theta_linf: self.max_linf,
            max_f: self.max_f,
            final_f: self.final_f,
            all_feasible: !self.any_infeasible,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn residual_hand_computed() {
        let g = ParamVector::new(vec![1.0, -1.0]).unwrap();
        let theta = ParamVector::new(vec![2.0, -2.0]).unwrap();
        // <g, theta> = 4, ||g||_1 = 2
        assert!((kkt_residual(&g, &theta, 0.5).unwrap() - 4.0).abs() < 1e-15);
        assert!((kkt_residual(&g, &theta, 1.0).unwrap() - 6.0).abs() < 1e-15);
        assert!((kkt_residual(&g, &theta, 0.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn residual_nonnegative_inside_the_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..500 {
            let d = rng.random_range(1..20);
            let lam = rng.random_range(0.01..10.0);
            let bound = 1.0 / lam;
            let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-bound..bound)).collect();
            let g: Vec<f64> = (0..d).map(|_| rng.random_range(-50.0..50.0)).collect();
            let r = kkt_residual(
                &ParamVector::from_raw(g),
                &ParamVector::from_raw(theta),
                lam,
            )
            .unwrap();
            assert!(r >= -1e-12, "residual {r} negative inside the box");
        }
    }

    #[test]
    fn residual_vanishes_at_decayed_stationary_points() {
        // stationarity of f + lam/2 ||.||^2 for f = ||x||^2/2 means
        // theta = 0; both terms vanish there
        let theta = ParamVector::zeros(3);
        let g = ParamVector::zeros(3);
        assert_eq!(kkt_residual(&g, &theta, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn residual_rejects_bad_lam() {
        let v = ParamVector::zeros(2);
        assert!(kkt_residual(&v, &v, -1.0).is_err());
        assert!(kkt_residual(&v, &v, f64::NAN).is_err());
    }

    fn unit_constants() -> TheoryConstants {
        TheoryConstants::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn stationarity_bound_unit_case_is_fifteen() {
        // terms: 1 + 2 + 4 + 6 + 2
        assert!((stationarity_bound(&unit_constants(), 1, 1) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_bound_hand_computed() {
        // d = 100, k = 10^4, unit problem constants: 15 * 10 / 10 = 15
        assert!((balanced_stationarity_bound(1.0, 1.0, 1.0, 10_000, 100) - 15.0).abs() < 1e-10);
    }

    #[test]
    fn balanced_bound_scales_as_sqrt_d_and_quarter_root_k() {
        let base = balanced_stationarity_bound(2.0, 3.0, 0.5, 4096, 50);
        let d4 = balanced_stationarity_bound(2.0, 3.0, 0.5, 4096, 200);
        assert!((d4 / base - 2.0).abs() < 1e-12);
        let k16 = balanced_stationarity_bound(2.0, 3.0, 0.5, 4096 * 16, 50);
        assert!((k16 / base - 0.5).abs() < 1e-12);
    }

    #[test]
    fn full_bound_below_lumped_bound_past_budget_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..300 {
            let l = rng.random_range(0.1..10.0);
            let delta = rng.random_range(0.1..10.0);
            let sigma = rng.random_range(0.1..10.0);
            let tc = TheoryConstants::balanced(l, delta, sigma).unwrap();
            let k = tc.min_budget().unwrap() * rng.random_range(1..64);
            let dim = rng.random_range(1..1000);
            let full = stationarity_bound(&tc, k, dim);
            let lumped = balanced_stationarity_bound(l, delta, sigma, k, dim);
            assert!(
                full <= lumped * (1.0 + 1e-9),
                "full {full} > lumped {lumped} at k = {k}"
            );
        }
    }

    #[test]
    fn momentum_error_bound_hand_computed() {
        let cfg = LionConfig {
            beta1: 0.9,
            beta2: 0.9,
            eta: 1e-3,
            lam: 0.0,
            k: 100,
        };
        // 1/(100 * 0.1) + 2 * 1e-3 * 10 / 0.1 + 0.1 / sqrt(0.1)
        let expect = 0.1 + 0.2 + 0.1 / 0.1f64.sqrt();
        let got = momentum_error_bound(1.0, 1.0, 100, &cfg);
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn momentum_error_bound_decays_along_the_schedule() {
        let tc = TheoryConstants::balanced(1.0, 1.0, 1.0).unwrap();
        let dim = 50;
        let mut prev = f64::INFINITY;
        for k in [100u64, 1_600, 25_600, 409_600] {
            let cfg = tc.instantiate(k, dim, 0.0).unwrap();
            let b = momentum_error_bound(tc.smoothness_l, tc.sigma, dim, &cfg);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn trajectory_envelope_unit_case_is_fifteen() {
        assert!((f_trajectory_bound(&unit_constants()) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn sgd_reference_rate_is_dimension_free_shape() {
        let r1 = sgd_reference_rate(2.0, 1.0, 1.0, 256);
        let r2 = sgd_reference_rate(2.0, 1.0, 1.0, 4096);
        assert!((r1 / r2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_respects_norm_equivalence_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..500 {
            let d = rng.random_range(1..100);
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let r = norm_ratio(&ParamVector::from_raw(v)).unwrap().unwrap();
            assert!(r >= 1.0 - 1e-12 && r <= (d as f64).sqrt() + 1e-12);
        }
        assert_eq!(norm_ratio(&ParamVector::zeros(5)).unwrap(), None);
    }

    #[test]
    fn gaussian_ratio_concentrates_at_sqrt_two_d_over_pi() {
        let d = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let mut sum = 0.0;
        let n = 100;
        for _ in 0..n {
            let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            sum += norm_ratio(&ParamVector::from_raw(v)).unwrap().unwrap();
        }
        let mean = sum / n as f64;
        let expect = (2.0 * d as f64 / std::f64::consts::PI).sqrt();
        assert!(
            (mean - expect).abs() < 0.01 * expect,
            "mean ratio {mean} vs expected {expect}"
        );
    }

    #[test]
    fn aggregates_average_and_track_extremes() {
        let mk = |k: u64, f: f64, kkt: f64, linf: f64, feasible: bool| StepMetrics {
            k,
            f,
            grad_l1: 2.0 * k as f64,
            grad_l2: k as f64,
            ratio: (k != 3).then_some(2.0),
            kkt_residual: kkt,
            theta_linf: linf,
            delta_l2: 0.5,
            feasible,
        };
        let mut acc = RunningAggregates::new();
        acc.push(&mk(1, 5.0, 4.0, 0.9, true));
        acc.push(&mk(2, 7.0, 2.0, 1.1, false));
        acc.push(&mk(3, 1.0, 0.0, 0.3, true));
        let agg = acc.finish().unwrap();
        assert_eq!(agg.n_steps, 3);
        assert!((agg.avg_kkt_residual - 2.0).abs() < 1e-15);
        assert_eq!(agg.min_kkt_residual, 0.0);
        assert!((agg.avg_grad_l1 - 4.0).abs() < 1e-15);
        assert!((agg.avg_grad_l2 - 2.0).abs() < 1e-15);
        assert!((agg.avg_delta_l2 - 0.5).abs() < 1e-15);
        // undefined ratios stay out of the mean
        assert!((agg.mean_ratio.unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(agg.max_theta_linf, 1.1);
        assert_eq!(agg.max_f, 7.0);
        assert_eq!(agg.final_f, 1.0);
        assert!(!agg.all_feasible);
        assert!(RunningAggregates::new().finish().is_err());
    }

    #[test]
    fn step_metrics_from_parts_consistent() {
        let theta = ParamVector::new(vec![0.5, -0.5]).unwrap();
        let grad = ParamVector::new(vec![3.0, -4.0]).unwrap();
        let dir = ParamVector::new(vec![3.0, -4.0]).unwrap();
        let m = StepMetrics::from_parts(7, 1.25, &theta, &grad, &dir, 1.0).unwrap();
        assert_eq!(m.k, 7);
        assert_eq!(m.grad_l1, 7.0);
        assert_eq!(m.grad_l2, 5.0);
        assert!((m.ratio.unwrap() - 1.4).abs() < 1e-15);
        // lam <g, theta> = 1.5 + 2 = 3.5; residual = 3.5 + 7
        assert!((m.kkt_residual - 10.5).abs() < 1e-15);
        assert_eq!(m.theta_linf, 0.5);
        assert_eq!(m.delta_l2, 0.0);
        assert!(m.feasible);
        // outside the box 1/lam the flag flips
        let far = ParamVector::new(vec![1.5, 0.0]).unwrap();
        let m2 = StepMetrics::from_parts(1, 0.0, &far, &grad, &dir, 1.0).unwrap();
        assert!(!m2.feasible);
    }
}
