//! Synthetic problems, reference solutions, experiment runs and the
//! measurements taken on them.

pub mod diagnostics;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod reference;
pub mod synth;
pub mod trace;

pub use experiment::{
    build_schedule, run_experiment, working_problem, Algorithm, ExperimentConfig, ExperimentOutcome,
    InnerLength, Mode, ScheduleSpec,
};
pub use metrics::{
    clamp_below, empirical_bounds, fit_rate, mean_curve, regret_curve, window, BoundsDiagnostics, Column,
    RateFit, RateModel,
};
pub use reference::{h_gap, solve_reference};
pub use synth::{gen_synthetic, ground_truth, ProblemKind, ProblemSpec, RidgeStrength};
pub use trace::{Trace, TraceRecord};
