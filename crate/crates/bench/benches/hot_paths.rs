//! Hot paths: the per-step update, the norm kernel behind every logged
//! metric, gradient sampling, and a small end-to-end experiment.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use lion_core::{
    lion_step, run_experiment_in_memory, ExperimentConfig, GradOracle, LionConfig, LionState,
    NoiseKind, NoiseModel, ParamVector, Problem,
};
use std::hint::black_box;

const DIM: usize = 10_000;

fn step_inputs() -> (LionConfig, LionState, ParamVector) {
    let cfg = LionConfig {
        beta1: 0.95,
        beta2: 0.98,
        eta: 1e-4,
        lam: 1.0,
        k: 1000,
    };
    let theta = ParamVector::constant(DIM, 0.3);
    let m = ParamVector::constant(DIM, -0.1);
    let g = ParamVector::constant(DIM, 0.7);
    (cfg, LionState::new(theta, m).unwrap(), g)
}

fn bench_lion_step(c: &mut Criterion) {
    let (cfg, state, g) = step_inputs();
    c.bench_function("lion_step_d10k", |b| {
        b.iter(|| lion_step(black_box(&cfg), black_box(&state), black_box(&g)).unwrap())
    });
}

fn bench_norms(c: &mut Criterion) {
    let v = ParamVector::constant(DIM, 0.3);
    c.bench_function("norms_d10k", |b| {
        b.iter(|| {
            let l1 = v.norm_l1().unwrap();
            let l2 = v.norm_l2().unwrap();
            let linf = v.norm_linf().unwrap();
            black_box((l1, l2, linf))
        })
    });
}

fn bench_sample_grad(c: &mut Criterion) {
    let problem = Problem::rastrigin_smooth(DIM, 1.0).unwrap();
    let noise = NoiseModel::new(1.0, NoiseKind::GaussianIsotropic).unwrap();
    let theta = ParamVector::constant(DIM, 0.3);
    c.bench_function("sample_grad_rastrigin_d10k", |b| {
        b.iter_batched(
            || GradOracle::new(&problem, noise, 1),
            |mut oracle| oracle.sample_grad(black_box(&theta)).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_small_experiment(c: &mut Criterion) {
    let cfg = ExperimentConfig::parse(
        "\
[problem]
name = quadratic
d = 100

[run]
mode = constrained
lambda = 1.0
k = 1000
sigma = 1.0
seed_list = 1

[schedule]
mode = theory
",
    )
    .unwrap();
    let mut group = c.benchmark_group("end_to_end");
    group.sample_size(10);
    group.bench_function("quadratic_d100_k1000", |b| {
        b.iter(|| run_experiment_in_memory(black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_lion_step,
    bench_norms,
    bench_sample_grad,
    bench_small_experiment
);
criterion_main!(benches);
