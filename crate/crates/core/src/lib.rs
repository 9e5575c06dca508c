//! Sign-momentum optimization with certified hyperparameter schedules and
//! an experiment harness for checking the predicted convergence behavior
//! on synthetic smooth stochastic problems.

pub mod error;
pub mod harness;
pub mod metrics;
pub mod optim;
pub mod problems;
pub mod ratefit;
pub mod schedule;
pub mod vector;

pub use error::{LionError, Result};
pub use metrics::{RunAggregates, StepMetrics};
pub use optim::{lion_step, sgd_step, LionConfig, LionState, SgdConfig};
pub use problems::{fd_gradient, GradOracle, NoiseKind, NoiseModel, Problem, SmoothnessReport};
pub use ratefit::{fit_loglog, PowerLawFit, SweepAxis, SweepPoint, SweepResult};
pub use schedule::{choose_lambda_unconstrained, TheoryConstants};
pub use vector::{axpy, ParamVector};

pub use harness::config::{
    ExperimentConfig, InitSpec, LambdaSpec, Mode, MomentumInit, ProblemSpec, ScheduleSpec,
    SweepSpec,
};
pub use harness::runner::{
    resolve, run_baseline_comparison, run_experiment, run_experiment_in_memory, run_single,
    summarize, write_comparison, BoundSet, CompareOutput, CompareRow, ExperimentOutput,
    ResolvedExperiment, RunRecord, SummaryRow,
};
pub use harness::sweep::{run_d_sweep, run_k_sweep, run_sweep};
pub use harness::verify::{verify_suite, VerifyCheck, VerifyReport};
