//! Seeded Monte-Carlo experiments, metrics and result export.

pub mod experiment;
pub mod metrics;
pub mod report;

pub use experiment::{
    aggregate, run_experiment, run_sweep, run_trial, AggregateRow, Axis, AxisValue, ExperimentOutput, RunOptions,
    SweepOutput, TracePoint, TrialResult,
};
pub use metrics::{calibrate_noise, nmse};
pub use report::{write_outputs, write_sweep, Format};
