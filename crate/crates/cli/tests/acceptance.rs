//! Acceptance gate: one test per promised behavior, each printing a
//! single PASS/FAIL line. Heavy experiments serialize on a shared lock
//! so their wall-clock limits are measured without contention; shared
//! suites are computed once and reused across the criteria that gate
//! different aspects of the same runs.

use lion_core::harness::csvio::read_table;
use lion_core::metrics::norm_ratio;
use lion_core::{
    lion_step, resolve, run_d_sweep, run_k_sweep, run_single, ExperimentConfig, ExperimentOutput,
    GradOracle, InitSpec, LambdaSpec, LionConfig, LionState, Mode, MomentumInit, NoiseKind,
    NoiseModel, ParamVector, Problem, ProblemSpec, RunRecord, ScheduleSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

static HEAVY: Mutex<()> = Mutex::new(());

fn criterion<F: FnOnce()>(number: u8, name: &str, body: F) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("ACCEPTANCE {number:02} {name}: PASS"),
        Err(payload) => {
            println!("ACCEPTANCE {number:02} {name}: FAIL");
            resume_unwind(payload);
        }
    }
}

fn problem_spec(name: &str, d: usize) -> ProblemSpec {
    ProblemSpec {
        name: name.into(),
        d,
        eig_min: 1.0,
        eig_max: 1.0,
        a: 1.0,
        domain_radius: 2.0,
        reg: 0.1,
        n_samples: 200,
        data_seed: 0,
    }
}

fn base_config(problem: ProblemSpec) -> ExperimentConfig {
    ExperimentConfig {
        problem,
        mode: Mode::Constrained,
        lambda: LambdaSpec::Fixed(1.0),
        k: 1000,
        sigma: 1.0,
        noise: NoiseKind::GaussianIsotropic,
        seeds: (1..=20).collect(),
        log_every: 1,
        out_dir: PathBuf::from("out"),
        momentum_init: MomentumInit::FirstSample,
        init: InitSpec::Constant { value: 0.5 },
        schedule: ScheduleSpec::Theory {
            c1: None,
            c2: None,
            c3: None,
        },
        sgd_eta: None,
        sweep: None,
    }
}

// --- randomized constrained suite shared by criteria 1 and 2 ---

struct ConstrainedTrial {
    lambda: f64,
    record: RunRecord,
}

struct ConstrainedSuite {
    trials: Vec<ConstrainedTrial>,
    elapsed: Duration,
}

fn constrained_suite() -> &'static ConstrainedSuite {
    static SUITE: OnceLock<ConstrainedSuite> = OnceLock::new();
    SUITE.get_or_init(|| {
        let _guard = HEAVY.lock().unwrap();
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
        let dims = [2usize, 10, 100];
        let lambdas = [0.1f64, 1.0, 10.0];
        let mut trials = Vec::with_capacity(100);
        for i in 0..100u64 {
            let d = dims[rng.random_range(0..dims.len())];
            let lambda = lambdas[rng.random_range(0..lambdas.len())];
            let beta1: f64 = rng.random_range(0.0..1.0);
            let beta2: f64 = rng.random_range(0.0..1.0);
            let u: f64 = rng.random_range(1e-3..=1.0);
            let name = if i % 2 == 0 { "quadratic" } else { "rastrigin-smooth" };
            let mut cfg = base_config(problem_spec(name, d));
            cfg.lambda = LambdaSpec::Fixed(lambda);
            cfg.schedule = ScheduleSpec::Manual {
                beta1,
                beta2,
                eta: u / lambda,
            };
            // random start strictly inside the box
            cfg.init = InitSpec::Uniform {
                scale: 1.0 / lambda,
                seed: 1000 + i,
            };
            cfg.momentum_init = if i % 3 == 0 {
                MomentumInit::Zero
            } else {
                MomentumInit::FirstSample
            };
            cfg.seeds = vec![i + 1];
            let rr = resolve(&cfg).expect("randomized config must resolve");
            let record = run_single(&rr, i + 1).expect("run must execute");
            assert!(record.aborted.is_none(), "trial {i} aborted");
            trials.push(ConstrainedTrial { lambda, record });
        }
        ConstrainedSuite {
            trials,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn criterion_01_feasibility_invariant() {
    criterion(1, "feasibility-invariant", || {
        let suite = constrained_suite();
        for (i, t) in suite.trials.iter().enumerate() {
            let cap = 1.0 / t.lambda + 1e-12;
            assert!(
                t.record.aggregates.max_theta_linf <= cap,
                "trial {i}: sup norm {} above box {cap}",
                t.record.aggregates.max_theta_linf
            );
            assert!(t.record.aggregates.all_feasible, "trial {i} flagged infeasible");
        }
        assert!(
            suite.elapsed < Duration::from_secs(30),
            "suite took {:?}",
            suite.elapsed
        );
    });
}

#[test]
fn criterion_02_residual_nonnegativity() {
    criterion(2, "residual-nonnegativity", || {
        for (i, t) in constrained_suite().trials.iter().enumerate() {
            assert!(
                t.record.aggregates.min_kkt_residual >= -1e-9,
                "trial {i}: residual {} below floor",
                t.record.aggregates.min_kkt_residual
            );
        }
    });
}

// --- theory-schedule cells shared by criteria 3, 4, and 5 ---

struct StationarityCells {
    outputs: Vec<ExperimentOutput>,
    elapsed: Duration,
}

fn stationarity_cells() -> &'static StationarityCells {
    static CELLS: OnceLock<StationarityCells> = OnceLock::new();
    CELLS.get_or_init(|| {
        let _guard = HEAVY.lock().unwrap();
        let start = Instant::now();
        let mut outputs = Vec::with_capacity(4);
        for d in [10usize, 100] {
            for k in [1000u64, 10000] {
                let mut cfg = base_config(problem_spec("quadratic", d));
                cfg.k = k;
                let out = lion_core::run_experiment_in_memory(&cfg).expect("cell must run");
                assert_eq!(out.summary.n_aborted, 0);
                outputs.push(out);
            }
        }
        StationarityCells {
            outputs,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn criterion_03_stationarity_rate_certificate() {
    criterion(3, "stationarity-rate-certificate", || {
        let cells = stationarity_cells();
        for out in &cells.outputs {
            let s = &out.summary;
            let bound = s
                .bounds
                .stationarity_lumped
                .expect("balanced cells carry the lumped rate");
            assert!(
                s.mean_avg_kkt_residual <= bound,
                "d = {}, K = {}: mean residual {} above certified {bound}",
                s.d,
                s.k,
                s.mean_avg_kkt_residual
            );
        }
        assert!(
            cells.elapsed < Duration::from_secs(120),
            "cells took {:?}",
            cells.elapsed
        );
    });
}

#[test]
fn criterion_04_momentum_deviation_certificate() {
    criterion(4, "momentum-deviation-certificate", || {
        for out in &stationarity_cells().outputs {
            let s = &out.summary;
            assert!(
                s.mean_avg_delta <= s.bounds.momentum_deviation,
                "d = {}, K = {}: mean deviation {} above certified {}",
                s.d,
                s.k,
                s.mean_avg_delta,
                s.bounds.momentum_deviation
            );
        }
    });
}

#[test]
fn criterion_05_trajectory_envelope_certificate() {
    criterion(5, "trajectory-envelope-certificate", || {
        for out in &stationarity_cells().outputs {
            let s = &out.summary;
            let bound = s.bounds.f_trajectory.expect("theory cells carry the envelope");
            assert!(
                s.mean_max_f_gap <= bound,
                "d = {}, K = {}: worst gap {} above certified {bound}",
                s.d,
                s.k,
                s.mean_max_f_gap
            );
        }
    });
}

#[test]
fn criterion_06_auto_decay_boundary_and_rate() {
    criterion(6, "auto-decay-boundary-and-rate", || {
        let _guard = HEAVY.lock().unwrap();
        let mut cfg = base_config(problem_spec("quadratic", 10));
        cfg.mode = Mode::Unconstrained;
        cfg.lambda = LambdaSpec::Auto;
        cfg.k = 10000;
        let out = lion_core::run_experiment_in_memory(&cfg).expect("experiment must run");
        let lam = out.resolved.lam;
        assert!(lam > 0.0);
        let worst = out
            .records
            .iter()
            .map(|r| lam * r.aggregates.max_theta_linf)
            .fold(0.0f64, f64::max);
        assert!(
            worst <= 0.5 + 1e-12,
            "iterates reached {worst} of the decay box"
        );
        let s = &out.summary;
        let bound = s.bounds.stationarity_lumped.expect("balanced run");
        assert!(
            s.mean_avg_grad_l1 / 2.0 <= bound,
            "half l1 mean {} above certified {bound}",
            s.mean_avg_grad_l1 / 2.0
        );
        assert_eq!(s.stationarity_lumped_ok, Some(true));
    });
}

#[test]
fn criterion_07_budget_sweep_decay_rate() {
    criterion(7, "budget-sweep-decay-rate", || {
        let _guard = HEAVY.lock().unwrap();
        let start = Instant::now();
        let cfg = base_config(problem_spec("quadratic", 50));
        let sweep = run_k_sweep(&cfg, &[100, 1000, 10000, 100000]).expect("sweep must run");
        let elapsed = start.elapsed();
        assert!(
            (sweep.bound_fit.slope + 0.25).abs() < 1e-12,
            "certified level slope {}",
            sweep.bound_fit.slope
        );
        assert!(sweep.metric_below_bound(), "a cell exceeded its certified level");
        assert!(
            sweep.metric_fit.slope <= -0.15,
            "measured decay too shallow: {}",
            sweep.metric_fit.slope
        );
        assert!(elapsed < Duration::from_secs(600), "sweep took {elapsed:?}");
    });
}

#[test]
fn criterion_08a_gaussian_ratio_concentration() {
    criterion(8, "gaussian-ratio-concentration", || {
        // an exact-zero gradient turns the oracle into a pure noise
        // source; sigma = sqrt(d) makes each coordinate standard normal
        let d = 10_000usize;
        let problem = Problem::identity_quadratic(d).unwrap();
        let noise = NoiseModel::new((d as f64).sqrt(), NoiseKind::GaussianIsotropic).unwrap();
        let mut oracle = GradOracle::new(&problem, noise, 0x8a);
        let origin = ParamVector::zeros(d);
        let mut sum = 0.0;
        for _ in 0..100 {
            let g = oracle.sample_grad(&origin).unwrap();
            sum += norm_ratio(&g)
                .unwrap()
                .expect("gaussian vector is nonzero");
        }
        let mean = sum / 100.0;
        let expected = (2.0 / std::f64::consts::PI).sqrt() * (d as f64).sqrt();
        let rel = (mean - expected).abs() / expected;
        assert!(
            rel < 0.03,
            "mean ratio {mean} strays {rel} from {expected}"
        );
    });
}

#[test]
fn criterion_08b_ratio_dimension_scaling() {
    criterion(8, "ratio-dimension-scaling", || {
        let _guard = HEAVY.lock().unwrap();
        let mut cfg = base_config(problem_spec("rastrigin-smooth", 10_000));
        cfg.sigma = 3.5;
        cfg.init = InitSpec::Uniform {
            scale: 0.05,
            seed: 17,
        };
        cfg.seeds = (1..=10).collect();
        let sweep = run_d_sweep(&cfg, &[100, 1000, 10000]).expect("sweep must run");
        let fit = sweep.ratio_fit.expect("dimension sweeps track the ratio");
        assert!(
            (0.35..=0.6).contains(&fit.slope),
            "ratio slope {} outside [0.35, 0.6]",
            fit.slope
        );
        for p in &sweep.points {
            let r = p.mean_ratio.expect("ratio defined at every cell");
            assert!(r >= 1.0 && r <= p.axis_value.sqrt() + 1e-9);
        }
    });
}

#[test]
fn criterion_09_gradient_oracle_consistency() {
    criterion(9, "gradient-oracle-consistency", || {
        let problems = [
            Problem::quadratic(10, 0.5, 4.0).unwrap(),
            Problem::rastrigin_smooth(10, 1.0).unwrap(),
            Problem::rosenbrock(10, 2.0).unwrap(),
            Problem::logistic(10, 80, 0.1, 3).unwrap(),
        ];
        for p in &problems {
            let radius = p.domain_radius().map_or(2.0, |r| 0.9 * r);
            let mut worst = 0.0f64;
            for trial in 0..100u64 {
                let theta = InitSpec::Uniform {
                    scale: radius,
                    seed: 0x90000 + trial,
                }
                .materialize(p.dim())
                .unwrap();
                let analytic = p.eval_grad(&theta).unwrap();
                let numeric = lion_core::fd_gradient(p, &theta).unwrap();
                worst = worst.max(
                    lion_core::problems::max_relative_error(&analytic, &numeric).unwrap(),
                );
            }
            assert!(worst < 1e-5, "{}: worst relative error {worst}", p.name());
        }
    });
}

#[test]
fn criterion_10_update_degeneracies() {
    criterion(10, "update-degeneracies", || {
        let d = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(0x10);
        let mut random_vec = |scale: f64| {
            ParamVector::new((0..d).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
        };

        // equal interpolation and decay weights collapse the direction
        // onto the refreshed momentum buffer, bitwise
        let cfg = LionConfig {
            beta1: 0.7,
            beta2: 0.7,
            eta: 0.01,
            lam: 0.0,
            k: 1000,
        };
        let mut state = LionState::new(random_vec(1.0), random_vec(1.0)).unwrap();
        for _ in 0..1000 {
            let g = random_vec(2.0);
            let (next, direction) = lion_step(&cfg, &state, &g).unwrap();
            assert_eq!(direction.as_slice(), next.m.as_slice());
            state = next;
        }

        // zero weights reduce the update to sign descent, bitwise
        let cfg = LionConfig {
            beta1: 0.0,
            beta2: 0.0,
            eta: 0.01,
            lam: 0.0,
            k: 1000,
        };
        let mut state = LionState::new(random_vec(1.0), random_vec(1.0)).unwrap();
        for _ in 0..1000 {
            let g = random_vec(2.0);
            let (next, _) = lion_step(&cfg, &state, &g).unwrap();
            let expected =
                lion_core::axpy(-cfg.eta, &g.sign().unwrap(), &state.theta).unwrap();
            assert_eq!(next.theta.as_slice(), expected.as_slice());
            assert_eq!(next.m.as_slice(), g.as_slice());
            state = next;
        }
    });
}

// --- binary-level checks ---

fn lion_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lion"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run_subcommand(sub: &str, config: &Path) {
    let output = lion_bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .output()
        .expect("binary must launch");
    assert!(
        output.status.success(),
        "{sub} failed: {}\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        for entry in std::fs::read_dir(&current).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "csv") {
                files.push(path);
            }
        }
    }
    files.sort();
    files
}

#[test]
fn criterion_11_byte_identical_reruns() {
    criterion(11, "byte-identical-reruns", || {
        let _guard = HEAVY.lock().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        let cases = [
            (
                "run",
                format!(
                    "\
[problem]
name = quadratic
d = 10

[run]
mode = constrained
lambda = 1.0
k = 500
sigma = 1.0
seeds = 3
out_dir = {}

[schedule]
mode = theory
",
                    root.join("OUT").display()
                ),
            ),
            (
                "sweep",
                format!(
                    "\
[problem]
name = quadratic
d = 6

[run]
mode = constrained
lambda = 1.0
k = 1000
sigma = 1.0
seeds = 3
out_dir = {}

[schedule]
mode = theory

[sweep]
axis = k
values = 100, 1000, 5000, 10000
",
                    root.join("OUT").display()
                ),
            ),
            (
                "verify",
                format!(
                    "\
[problem]
name = quadratic
d = 10

[run]
mode = constrained
lambda = 1.0
k = 500
sigma = 1.0
seeds = 3
out_dir = {}

[schedule]
mode = theory
",
                    root.join("OUT").display()
                ),
            ),
        ];
        for (sub, template) in &cases {
            for pass in ["first", "second"] {
                let out_dir = root.join(format!("{sub}_{pass}"));
                let body = template.replace(&root.join("OUT").display().to_string(), &out_dir.display().to_string());
                let config = write_config(root, &format!("{sub}_{pass}.ini"), &body);
                run_subcommand(sub, &config);
            }
            let first = csv_files(&root.join(format!("{sub}_first")));
            let second = csv_files(&root.join(format!("{sub}_second")));
            assert!(!first.is_empty(), "{sub} wrote no CSVs");
            assert_eq!(first.len(), second.len(), "{sub} artifact count differs");
            for (a, b) in first.iter().zip(&second) {
                assert_eq!(
                    a.file_name(),
                    b.file_name(),
                    "{sub} artifact names differ"
                );
                let bytes_a = std::fs::read(a).unwrap();
                let bytes_b = std::fs::read(b).unwrap();
                assert_eq!(
                    bytes_a,
                    bytes_b,
                    "{sub}: {} differs between invocations",
                    a.file_name().unwrap().to_string_lossy()
                );
            }
        }
    });
}

#[test]
fn criterion_12_comparison_artifacts() {
    criterion(12, "comparison-artifacts", || {
        let _guard = HEAVY.lock().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out_dir = dir.path().join("cmp");
        let config = write_config(
            dir.path(),
            "compare.ini",
            &format!(
                "\
[problem]
name = rastrigin-smooth
d = 100

[run]
mode = constrained
lambda = 1.0
k = 1000
sigma = 4.0
seeds = 5
out_dir = {}

[schedule]
mode = theory
",
                out_dir.display()
            ),
        );
        run_subcommand("compare", &config);

        let table = read_table(&out_dir.join("compare.csv")).unwrap();
        assert_eq!(
            table.headers,
            vec!["k", "lion_f", "lion_grad_l1", "sgd_f", "sgd_grad_l1"]
        );
        assert_eq!(table.rows.len(), 1000, "one row per step");
        for col in ["lion_f", "lion_grad_l1", "sgd_f", "sgd_grad_l1"] {
            let values = table.float_column(col).unwrap();
            assert!(
                values.iter().all(|v| v.is_some_and(|x| x.is_finite())),
                "column {col} has holes"
            );
        }
        let ks = table.float_column("k").unwrap();
        assert_eq!(ks.first().copied().flatten(), Some(1.0));
        assert_eq!(ks.last().copied().flatten(), Some(1000.0));

        let svg = std::fs::read_to_string(out_dir.join("compare.svg")).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 4, "four plotted series");
    });
}
