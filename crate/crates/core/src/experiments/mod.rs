//! Monte Carlo harness: success-rate sweeps, the ARMA trajectory and the
//! reconstruction demo, with CSV and SVG output.
//!
//! Trial `t` at sweep value `v` uses the seed `split_seed(base, v, t)`, so
//! results do not depend on scheduling and reruns are byte-identical.

mod config;
mod output;
mod run;
mod stats;
pub mod svg;

pub use config::{ExperimentConfig, ExperimentKind, PROFILE_NAMES};
pub use output::{curve_csv, demo_csv, emit_outputs, trajectory_csv, OutputFormat, CURVE_HEADER};
pub use run::{
    default_epsilon, default_lambda, default_separation, run_arma_trajectory, run_experiment, run_reconstruction_demo,
    run_sign_experiment, run_success_vs_order, run_success_vs_sparsity, run_tv_stress, CurvePoint, DemoRecord,
    ExperimentOutput, ExperimentResult, SuccessCurve, TrajectoryRecord, TrajectoryRun, TrialRecord,
    NOISELESS_LAMBDA_FRACTION,
};
pub use stats::{wilson_interval, Z_95};
