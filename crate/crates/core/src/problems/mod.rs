//! Synthetic objectives with certified smoothness constants, plus the
//! seeded stochastic gradient oracle.
//!
//! Every problem carries an analytic gradient, a Lipschitz constant for
//! that gradient that is valid on the declared domain, and a lower bound
//! on the objective. The catalog:
//!
//! * `quadratic` — diagonal SPD quadratic, `L` = largest eigenvalue,
//!   globally smooth, strongly convex.
//! * `rastrigin-smooth` — `||x||^2 + a * sum(1 - cos(2 pi x_i))`,
//!   `L = 2 + 4 pi^2 a`, coercive and nonconvex for the default `a = 1`.
//! * `rosenbrock` — chained Rosenbrock, only locally smooth; requires a
//!   declared box radius and refuses evaluation outside it.
//! * `logistic` — synthetic l2-regularized logistic regression,
//!   `L = max_eig(X^T X) / (4 n) + reg`.

mod noise;

pub use noise::{GradOracle, NoiseKind, NoiseModel};

use crate::error::{LionError, Result};
use crate::vector::ParamVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Tolerance used when checking that a point lies inside the certified box.
const DOMAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
enum ProblemForm {
    /// f(x) = 1/2 sum_i eig_i x_i^2
    Quadratic { eigs: Vec<f64> },
    /// f(x) = sum_i x_i^2 + a (1 - cos(2 pi x_i))
    RastriginSmooth { a: f64 },
    /// f(x) = sum_{i<d-1} b (x_{i+1} - x_i^2)^2 + (1 - x_i)^2
    Rosenbrock { b: f64 },
    /// f(x) = (1/n) sum_i ln(1 + exp(-y_i <x_i, theta>)) + reg/2 ||theta||^2
    Logistic {
        features: Vec<f64>, // n x d, row major
        labels: Vec<f64>,   // entries in {-1, +1}
        n: usize,
        reg: f64,
    },
}

/// An objective with exact value/gradient and certified constants.
#[derive(Debug, Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    smoothness_l: f64,
    f_star_lower: f64,
    coercive: bool,
    domain_radius: Option<f64>,
    strong_convexity_mu: Option<f64>,
    form: ProblemForm,
}

impl Problem {
    /// Diagonal SPD quadratic with eigenvalues log-spaced in
    /// `[eig_min, eig_max]`. `eig_min == eig_max == 1` gives the identity
    /// quadratic.
    pub fn quadratic(dim: usize, eig_min: f64, eig_max: f64) -> Result<Self> {
        if dim == 0 {
            return Err(LionError::InvalidInput("dim must be >= 1".into()));
        }
        if !(eig_min > 0.0 && eig_max >= eig_min) {
            return Err(LionError::InvalidInput(
                "quadratic eigenvalues need 0 < eig_min <= eig_max".into(),
            ));
        }
        let eigs: Vec<f64> = if dim == 1 {
            vec![eig_max]
        } else {
            let lmin = eig_min.ln();
            let lmax = eig_max.ln();
            (0..dim)
                .map(|i| (lmin + (lmax - lmin) * i as f64 / (dim - 1) as f64).exp())
                .collect()
        };
        let l = eigs.iter().cloned().fold(f64::MIN, f64::max);
        let mu = eigs.iter().cloned().fold(f64::MAX, f64::min);
        Ok(Self {
            name: "quadratic".into(),
            dim,
            smoothness_l: l,
            f_star_lower: 0.0,
            coercive: true,
            domain_radius: None,
            strong_convexity_mu: Some(mu),
            form: ProblemForm::Quadratic { eigs },
        })
    }

    /// The identity quadratic `f = ||x||^2 / 2`.
    pub fn identity_quadratic(dim: usize) -> Result<Self> {
        Self::quadratic(dim, 1.0, 1.0)
    }

    /// Smooth Rastrigin variant: `||x||^2 + a sum(1 - cos 2 pi x_i)`.
    pub fn rastrigin_smooth(dim: usize, a: f64) -> Result<Self> {
        if dim == 0 {
            return Err(LionError::InvalidInput("dim must be >= 1".into()));
        }
        if a < 0.0 {
            return Err(LionError::InvalidInput("rastrigin a must be >= 0".into()));
        }
        Ok(Self {
            name: "rastrigin-smooth".into(),
            dim,
            smoothness_l: 2.0 + 4.0 * PI * PI * a,
            f_star_lower: 0.0,
            coercive: true,
            domain_radius: None,
            strong_convexity_mu: None,
            form: ProblemForm::RastriginSmooth { a },
        })
    }

    /// Chained Rosenbrock with curvature certified on the box
    /// `||x||_inf <= domain_radius` via a Gershgorin bound on the
    /// tridiagonal Hessian.
    pub fn rosenbrock(dim: usize, domain_radius: f64) -> Result<Self> {
        if dim < 2 {
            return Err(LionError::InvalidInput(
                "rosenbrock needs dim >= 2".into(),
            ));
        }
        if !(domain_radius >= 1.0) {
            return Err(LionError::InvalidInput(
                "rosenbrock domain_radius must be >= 1 so the minimizer is inside".into(),
            ));
        }
        let b = 100.0;
        let r = domain_radius;
        // max Gershgorin row sum of the Hessian over the box
        let l = 12.0 * b * r * r + 12.0 * b * r + 2.0 * b + 2.0;
        Ok(Self {
            name: "rosenbrock".into(),
            dim,
            smoothness_l: l,
            f_star_lower: 0.0,
            coercive: true,
            domain_radius: Some(domain_radius),
            strong_convexity_mu: None,
            form: ProblemForm::Rosenbrock { b },
        })
    }

    /// Synthetic l2-regularized logistic regression on `n` Gaussian samples
    /// generated from `data_seed`.
    pub fn logistic(dim: usize, n: usize, reg: f64, data_seed: u64) -> Result<Self> {
        if dim == 0 || n == 0 {
            return Err(LionError::InvalidInput(
                "logistic needs dim >= 1 and n >= 1".into(),
            ));
        }
        if reg <= 0.0 {
            return Err(LionError::InvalidInput(
                "logistic reg must be > 0 (coercivity comes from the l2 term)".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(data_seed);
        let w_true: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let mut features = Vec::with_capacity(n * dim);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let margin: f64 = row
                .iter()
                .zip(w_true.iter())
                .map(|(x, w)| x * w)
                .sum::<f64>()
                / (dim as f64).sqrt();
            let flip: f64 = rng.sample(StandardNormal);
            labels.push(if margin + 0.3 * flip >= 0.0 { 1.0 } else { -1.0 });
            features.extend_from_slice(&row);
        }
        let lam_max = top_eigenvalue_xtx(&features, n, dim);
        // power iteration converges from below; 1% headroom keeps the
        // declared constant a true upper bound
        let l = 0.25 * lam_max * 1.01 / n as f64 + reg;
        Ok(Self {
            name: "logistic".into(),
            dim,
            smoothness_l: l,
            f_star_lower: 0.0,
            coercive: true,
            domain_radius: None,
            strong_convexity_mu: Some(reg),
            form: ProblemForm::Logistic {
                features,
                labels,
                n,
                reg,
            },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lipschitz constant of the gradient, valid on the declared domain.
    pub fn smoothness_l(&self) -> f64 {
        self.smoothness_l
    }

    /// A valid lower bound on `inf f`, used as f_star in schedule formulas.
    pub fn f_star_lower(&self) -> f64 {
        self.f_star_lower
    }

    pub fn coercive(&self) -> bool {
        self.coercive
    }

    /// Box radius on which `smoothness_l` is certified, for problems that
    /// are only locally smooth.
    pub fn domain_radius(&self) -> Option<f64> {
        self.domain_radius
    }

    /// Radius of a box containing the sublevel set
    /// `{x : f(x) - f_star_lower <= f_gap}`, for problems that register an
    /// invertible coercivity bound.
    pub fn sublevel_radius(&self, f_gap: f64) -> Option<f64> {
        if f_gap < 0.0 {
            return None;
        }
        match &self.form {
            ProblemForm::Quadratic { .. } => {
                let mu = self.strong_convexity_mu.expect("quadratic has mu");
                Some((2.0 * f_gap / mu).sqrt())
            }
            // f >= ||x||^2, so the sublevel set sits inside ||x||_2 <= sqrt(gap)
            ProblemForm::RastriginSmooth { .. } => Some(f_gap.sqrt()),
            ProblemForm::Logistic { reg, .. } => Some((2.0 * f_gap / reg).sqrt()),
            ProblemForm::Rosenbrock { .. } => None,
        }
    }

    fn check_point(&self, theta: &ParamVector) -> Result<()> {
        if theta.dim() != self.dim {
            return Err(LionError::DimensionMismatch {
                expected: self.dim,
                got: theta.dim(),
            });
        }
        if let Some(r) = self.domain_radius {
            let linf = theta.norm_linf()?;
            if linf > r + DOMAIN_SLACK {
                return Err(LionError::Domain(format!(
                    "{}: ||theta||_inf = {linf} exceeds certified radius {r}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Exact objective value.
    pub fn eval_f(&self, theta: &ParamVector) -> Result<f64> {
        self.check_point(theta)?;
        let t = theta.as_slice();
        let v = match &self.form {
            ProblemForm::Quadratic { eigs } => {
                0.5 * t
                    .iter()
                    .zip(eigs.iter())
                    .map(|(x, a)| a * x * x)
                    .sum::<f64>()
            }
            ProblemForm::RastriginSmooth { a } => t
                .iter()
                .map(|x| x * x + a * (1.0 - (2.0 * PI * x).cos()))
                .sum(),
            ProblemForm::Rosenbrock { b } => {
                let mut sum = 0.0;
                for i in 0..self.dim - 1 {
                    let gap = t[i + 1] - t[i] * t[i];
                    sum += b * gap * gap + (1.0 - t[i]) * (1.0 - t[i]);
                }
                sum
            }
            ProblemForm::Logistic {
                features,
                labels,
                n,
                reg,
            } => {
                let mut loss = 0.0;
                for (i, &y) in labels.iter().enumerate() {
                    let z: f64 = features[i * self.dim..(i + 1) * self.dim]
                        .iter()
                        .zip(t.iter())
                        .map(|(x, w)| x * w)
                        .sum();
                    loss += log1p_exp(-y * z);
                }
                loss / *n as f64 + 0.5 * reg * t.iter().map(|x| x * x).sum::<f64>()
            }
        };
        if !v.is_finite() {
            return Err(LionError::NonFinite(format!("{} objective", self.name)));
        }
        debug_assert!(
            v >= self.f_star_lower - 1e-9,
            "objective fell below its declared lower bound"
        );
        Ok(v)
    }

    /// Exact analytic gradient.
    pub fn eval_grad(&self, theta: &ParamVector) -> Result<ParamVector> {
        self.check_point(theta)?;
        let t = theta.as_slice();
        let g = match &self.form {
            ProblemForm::Quadratic { eigs } => {
                t.iter().zip(eigs.iter()).map(|(x, a)| a * x).collect()
            }
            ProblemForm::RastriginSmooth { a } => t
                .iter()
                .map(|x| 2.0 * x + 2.0 * PI * a * (2.0 * PI * x).sin())
                .collect(),
            ProblemForm::Rosenbrock { b } => {
                let mut g = vec![0.0; self.dim];
                for i in 0..self.dim - 1 {
                    let gap = t[i + 1] - t[i] * t[i];
                    g[i] += -4.0 * b * t[i] * gap - 2.0 * (1.0 - t[i]);
                    g[i + 1] += 2.0 * b * gap;
                }
                g
            }
            ProblemForm::Logistic {
                features,
                labels,
                n,
                reg,
            } => {
                let mut g = vec![0.0; self.dim];
                for (i, &y) in labels.iter().enumerate() {
                    let row = &features[i * self.dim..(i + 1) * self.dim];
                    let z: f64 = row.iter().zip(t.iter()).map(|(x, w)| x * w).sum();
                    let coef = -y * sigmoid(-y * z);
                    for (gj, xj) in g.iter_mut().zip(row.iter()) {
                        *gj += coef * xj;
                    }
                }
                let inv_n = 1.0 / *n as f64;
                for (gj, tj) in g.iter_mut().zip(t.iter()) {
                    *gj = *gj * inv_n + reg * tj;
                }
                g
            }
        };
        let g = ParamVector::from_raw(g);
        if !g.is_finite() {
            return Err(LionError::NonFinite(format!("{} gradient", self.name)));
        }
        Ok(g)
    }

    /// Samples point pairs inside the certified domain and checks the
    /// gradient-Lipschitz ratio against the declared constant.
    pub fn certify_smoothness(&self, trials: usize, seed: u64) -> Result<SmoothnessReport> {
        if trials == 0 {
            return Err(LionError::InvalidInput("trials must be >= 1".into()));
        }
        let radius = self.domain_radius.unwrap_or(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut max_ratio = 0.0f64;
        for _ in 0..trials {
            let x = random_box_point(&mut rng, self.dim, radius);
            let y = random_box_point(&mut rng, self.dim, radius);
            let dx = x.sub(&y)?;
            let dist = dx.norm_l2()?;
            if dist == 0.0 {
                continue;
            }
            let dg = self.eval_grad(&x)?.sub(&self.eval_grad(&y)?)?;
            max_ratio = max_ratio.max(dg.norm_l2()? / dist);
        }
        Ok(SmoothnessReport {
            declared_l: self.smoothness_l,
            max_ratio,
            trials,
            pass: max_ratio <= self.smoothness_l * (1.0 + 1e-9),
        })
    }
}

/// Outcome of a sampled smoothness certification.
#[derive(Debug, Clone)]
pub struct SmoothnessReport {
    pub declared_l: f64,
    pub max_ratio: f64,
    pub trials: usize,
    pub pass: bool,
}

/// Central finite-difference gradient using only objective values, with
/// per-coordinate step `h = 1e-6 * max(1, |theta_i|)`. Serves as the
/// independent check on the analytic gradients.
pub fn fd_gradient(p: &Problem, theta: &ParamVector) -> Result<ParamVector> {
    let mut point = theta.as_slice().to_vec();
    let mut g = vec![0.0; p.dim()];
    for i in 0..p.dim() {
        let orig = point[i];
        let h = 1e-6 * orig.abs().max(1.0);
        point[i] = orig + h;
        let f_plus = p.eval_f(&ParamVector::from_raw(point.clone()))?;
        point[i] = orig - h;
        let f_minus = p.eval_f(&ParamVector::from_raw(point.clone()))?;
        point[i] = orig;
        g[i] = (f_plus - f_minus) / (2.0 * h);
    }
    Ok(ParamVector::from_raw(g))
}

/// Worst relative disagreement between an analytic and a reference
/// gradient, coordinate-wise with denominator `max(1, |reference_i|)`.
pub fn max_relative_error(analytic: &ParamVector, reference: &ParamVector) -> Result<f64> {
    analytic
        .as_slice()
        .iter()
        .zip(reference.as_slice().iter())
        .map(|(a, r)| (a - r).abs() / r.abs().max(1.0))
        .try_fold(0.0f64, |m, e| Ok(m.max(e)))
}

pub(crate) fn random_box_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> ParamVector {
    ParamVector::from_raw((0..dim).map(|_| rng.random_range(-radius..radius)).collect())
}

/// Numerically stable ln(1 + exp(z)).
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Largest eigenvalue of X^T X by power iteration applied through X.
fn top_eigenvalue_xtx(features: &[f64], n: usize, dim: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0e1_6e17);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut lam = 0.0;
    for _ in 0..500 {
        // w = X^T (X v)
        let mut xv = vec![0.0; n];
        for i in 0..n {
            xv[i] = features[i * dim..(i + 1) * dim]
                .iter()
                .zip(v.iter())
                .map(|(x, vi)| x * vi)
                .sum();
        }
        let mut w = vec![0.0; dim];
        for i in 0..n {
            let c = xv[i];
            for (wj, xj) in w.iter_mut().zip(&features[i * dim..(i + 1) * dim]) {
                *wj += c * xj;
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for wi in w.iter_mut() {
            *wi /= norm;
        }
        lam = norm; // ||X^T X v|| for unit v converges to the top eigenvalue
        v = w;
    }
    lam
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_identity_values() {
        let p = Problem::identity_quadratic(2).unwrap();
        let theta = ParamVector::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(p.eval_f(&theta).unwrap(), 1.0);
        let g = p.eval_grad(&ParamVector::new(vec![1.0, -1.0]).unwrap()).unwrap();
        assert_eq!(g.as_slice(), &[1.0, -1.0]);
        assert_eq!(p.smoothness_l(), 1.0);
    }

    #[test]
    fn rastrigin_minimum_at_origin() {
        let p = Problem::rastrigin_smooth(4, 1.0).unwrap();
        let zero = ParamVector::zeros(4);
        assert_eq!(p.eval_f(&zero).unwrap(), 0.0);
        let g = p.eval_grad(&zero).unwrap();
        assert_eq!(g.as_slice(), &[0.0; 4]);
        assert!((p.smoothness_l() - (2.0 + 4.0 * PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn rosenbrock_minimizer_is_all_ones() {
        let p = Problem::rosenbrock(5, 2.0).unwrap();
        let ones = ParamVector::constant(5, 1.0);
        assert_eq!(p.eval_f(&ones).unwrap(), 0.0);
        assert_eq!(p.eval_grad(&ones).unwrap().norm_l2().unwrap(), 0.0);
    }

    #[test]
    fn rosenbrock_rejects_points_outside_box() {
        let p = Problem::rosenbrock(3, 2.0).unwrap();
        let outside = ParamVector::constant(3, 2.5);
        assert!(matches!(p.eval_f(&outside), Err(LionError::Domain(_))));
        assert!(matches!(p.eval_grad(&outside), Err(LionError::Domain(_))));
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let p = Problem::identity_quadratic(3).unwrap();
        let theta = ParamVector::zeros(2);
        assert!(matches!(
            p.eval_f(&theta),
            Err(LionError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let problems = vec![
            Problem::quadratic(6, 0.5, 4.0).unwrap(),
            Problem::rastrigin_smooth(6, 1.0).unwrap(),
            Problem::rosenbrock(6, 2.0).unwrap(),
            Problem::logistic(6, 40, 0.1, 3).unwrap(),
        ];
        for p in &problems {
            // stay clear of the box edge so the FD stencil remains in-domain
            let radius = p.domain_radius().unwrap_or(2.0) - 1e-3;
            for _ in 0..100 {
                let theta = random_box_point(&mut rng, p.dim(), radius);
                let analytic = p.eval_grad(&theta).unwrap();
                let numeric = fd_gradient(p, &theta).unwrap();
                let err = max_relative_error(&analytic, &numeric).unwrap();
                assert!(
                    err < 1e-5,
                    "{}: finite-difference mismatch {err}",
                    p.name()
                );
            }
        }
    }

    #[test]
    fn certify_identity_quadratic_attains_l_exactly() {
        let p = Problem::identity_quadratic(8).unwrap();
        let report = p.certify_smoothness(200, 5).unwrap();
        assert!(report.pass);
        assert_eq!(report.max_ratio, 1.0);
    }

    #[test]
    fn certify_rastrigin_stays_below_analytic_l() {
        let p = Problem::rastrigin_smooth(8, 1.0).unwrap();
        let report = p.certify_smoothness(500, 6).unwrap();
        assert!(report.pass);
        assert!(report.max_ratio <= 2.0 + 4.0 * PI * PI);
    }

    #[test]
    fn certify_rosenbrock_box_l_dominates_hessian_grid() {
        let p = Problem::rosenbrock(2, 2.0).unwrap();
        let report = p.certify_smoothness(500, 7).unwrap();
        assert!(report.pass, "sampled ratio {} > L {}", report.max_ratio, p.smoothness_l());

        // independent grid search over the box: spectral norm of the 2x2
        // Hessian must stay below the declared Gershgorin constant
        let b = 100.0;
        let mut grid_max = 0.0f64;
        let steps = 81;
        for i in 0..steps {
            for j in 0..steps {
                let x0 = -2.0 + 4.0 * i as f64 / (steps - 1) as f64;
                let x1 = -2.0 + 4.0 * j as f64 / (steps - 1) as f64;
                let h00 = 12.0 * b * x0 * x0 - 4.0 * b * x1 + 2.0;
                let h01 = -4.0 * b * x0;
                let h11 = 2.0 * b;
                let mean = 0.5 * (h00 + h11);
                let disc = (0.5 * (h00 - h11)).hypot(h01);
                grid_max = grid_max.max((mean + disc).abs()).max((mean - disc).abs());
            }
        }
        assert!(grid_max <= p.smoothness_l());
        assert!(report.max_ratio <= grid_max * (1.0 + 1e-9));
    }

    #[test]
    fn certify_logistic_inflated_power_iteration_l() {
        let p = Problem::logistic(5, 60, 0.1, 9).unwrap();
        let report = p.certify_smoothness(300, 8).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn coercive_problems_dominate_growing_envelopes() {
        // each coercive problem satisfies f(x) >= envelope(||x||_inf) with
        // an envelope that diverges, so sampled sphere minima must too
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cases: Vec<(Problem, Box<dyn Fn(f64) -> f64>)> = vec![
            (
                Problem::quadratic(5, 0.5, 2.0).unwrap(),
                Box::new(|r: f64| 0.5 * 0.5 * r * r),
            ),
            (Problem::rastrigin_smooth(5, 1.0).unwrap(), Box::new(|r: f64| r * r)),
            (
                Problem::logistic(5, 40, 0.1, 3).unwrap(),
                Box::new(|r: f64| 0.5 * 0.1 * r * r),
            ),
        ];
        for (p, envelope) in &cases {
            assert!(p.coercive());
            let mut radius = 0.5;
            for _ in 0..10 {
                // sample the l-inf sphere: one coordinate pinned to +/- radius
                for _ in 0..50 {
                    let mut point: Vec<f64> =
                        (0..p.dim()).map(|_| rng.random_range(-radius..radius)).collect();
                    let pin = rng.random_range(0..p.dim());
                    point[pin] = if rng.random::<bool>() { radius } else { -radius };
                    let f = p.eval_f(&ParamVector::from_raw(point)).unwrap();
                    assert!(
                        f >= envelope(radius) - 1e-9,
                        "{}: f = {f} below envelope at r = {radius}",
                        p.name()
                    );
                }
                radius *= 2.0;
            }
            // the envelope itself diverges, hence so does the objective
            assert!(envelope(256.0) > 1e3);
        }
    }

    #[test]
    fn objective_never_below_declared_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let problems = vec![
            Problem::quadratic(4, 1.0, 3.0).unwrap(),
            Problem::rastrigin_smooth(4, 1.0).unwrap(),
            Problem::rosenbrock(4, 2.0).unwrap(),
            Problem::logistic(4, 30, 0.2, 5).unwrap(),
        ];
        for p in &problems {
            let radius = p.domain_radius().unwrap_or(5.0);
            for _ in 0..200 {
                let theta = random_box_point(&mut rng, p.dim(), radius);
                assert!(p.eval_f(&theta).unwrap() >= p.f_star_lower());
            }
        }
    }

    #[test]
    fn sublevel_radius_contains_sampled_sublevel_points() {
        let p = Problem::quadratic(3, 2.0, 2.0).unwrap();
        // f = ||x||^2 with mu = 2: gap 8 gives radius sqrt(2*8/2) = 2.83..
        let r = p.sublevel_radius(8.0).unwrap();
        assert!((r - (8.0f64).sqrt()).abs() < 1e-12);
        assert!(Problem::rosenbrock(3, 2.0).unwrap().sublevel_radius(1.0).is_none());
    }
}
