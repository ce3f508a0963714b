//! Solver updates. Every step mutates an [`IterateState`] in place and
//! reports what it sampled and what it cost.

mod rho;
mod sampler;
mod steps;
mod vr;

pub use rho::{auto_inner_length, compute_rho_orbcdvd, compute_rho_svrg};
pub use sampler::Sampler;
pub use steps::{
    orbcd_online_step, orbcd_stochastic_step, prox_gd_step, prox_online_step, prox_sgd_step, rbcd_step,
};
pub use vr::{
    orbcdvd_outer_stage, prox_svrg_outer_stage, vr_gradient, OutputMode, StageOutcome,
    VRStageState, VrOptions,
};

use ndarray::Array1;

use crate::error::{check_len, Result};

/// Current iterate and the index of the round about to be played (from 1).
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x: Array1<f64>,
    pub t: u64,
}

impl IterateState {
    /// `x = 0`, `t = 1`.
    pub fn zeros(n: usize) -> Self {
        Self {
            x: Array1::zeros(n),
            t: 1,
        }
    }

    pub fn from_point(x: Array1<f64>, expected_dim: usize) -> Result<Self> {
        check_len(expected_dim, x.len())?;
        Ok(Self { x, t: 1 })
    }
}

/// What a single update sampled and spent.
///
/// Cost is counted in block units: one single-batch block gradient is one
/// unit and one single-batch full gradient is `J` units, so dividing by `J`
/// gives the number of full single-batch gradient evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub block: Option<usize>,
    pub batch: Option<usize>,
    pub eta: f64,
    pub cost_units: u64,
}

/// Convert block units to single-batch full-gradient equivalents.
pub fn units_to_grad_evals(units: u64, num_blocks: usize) -> f64 {
    units as f64 / num_blocks as f64
}
