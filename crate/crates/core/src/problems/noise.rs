//! Stochastic gradient oracle: exact gradient plus zero-mean noise whose
//! second moment is controlled coordinate-wise so that E||xi||^2 <= sigma^2
//! regardless of dimension.
//!
//! Draws are a pure function of (seed, counter): the counter selects the
//! ChaCha stream, so replaying a run or splitting it across processes
//! reproduces the identical noise sequence bit for bit.

use crate::error::{LionError, Result};
use crate::problems::Problem;
use crate::vector::ParamVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Noise distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Per-coordinate N(0, sigma^2/d), so E||xi||^2 = sigma^2 exactly.
    GaussianIsotropic,
    /// Per-coordinate uniform on [-sigma/sqrt(d), sigma/sqrt(d)], so
    /// E||xi||^2 = sigma^2/3 and the crude bound sigma^2 still holds.
    BoundedUniform,
}

/// Noise level plus family. `sigma == 0` means the oracle is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub kind: NoiseKind,
}

impl NoiseModel {
    pub fn new(sigma: f64, kind: NoiseKind) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(LionError::InvalidInput(
                "noise sigma must be finite and >= 0".into(),
            ));
        }
        Ok(Self { sigma, kind })
    }

    pub fn exact() -> Self {
        Self {
            sigma: 0.0,
            kind: NoiseKind::GaussianIsotropic,
        }
    }

    pub fn per_coord_scale(&self, dim: usize) -> f64 {
        self.sigma / (dim as f64).sqrt()
    }
}

/// Stateful sampling handle over a problem. Each `sample_grad` call
/// consumes one counter value (even with sigma == 0, so exact and noisy
/// runs visit the same counters).
#[derive(Debug, Clone)]
pub struct GradOracle<'p> {
    problem: &'p Problem,
    noise: NoiseModel,
    seed: u64,
    counter: u64,
}

impl<'p> GradOracle<'p> {
    pub fn new(problem: &'p Problem, noise: NoiseModel, seed: u64) -> Self {
        Self {
            problem,
            noise,
            seed,
            counter: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of draws consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Exact gradient plus one noise draw; advances the counter.
    pub fn sample_grad(&mut self, theta: &ParamVector) -> Result<ParamVector> {
        let exact = self.problem.eval_grad(theta)?;
        let counter = self.counter;
        self.counter += 1;
        if self.noise.sigma == 0.0 {
            return Ok(exact);
        }
        let xi = noise_draw(self.seed, counter, self.problem.dim(), self.noise);
        let mut data: Vec<f64> = exact.as_slice().to_vec();
        for (d, x) in data.iter_mut().zip(xi.iter()) {
            *d += x;
        }
        let g = ParamVector::from_raw(data);
        if !g.is_finite() {
            return Err(LionError::NonFinite("sampled gradient".into()));
        }
        Ok(g)
    }
}

/// The pure noise function: same (seed, counter, dim, model) always yields
/// the same vector.
pub(crate) fn noise_draw(seed: u64, counter: u64, dim: usize, model: NoiseModel) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(counter);
    let s = model.per_coord_scale(dim);
    match model.kind {
        NoiseKind::GaussianIsotropic => (0..dim)
            .map(|_| s * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        NoiseKind::BoundedUniform => (0..dim)
            .map(|_| s * (2.0 * rng.random::<f64>() - 1.0))
            .collect(),
    }
}
