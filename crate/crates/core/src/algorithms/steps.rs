use ndarray::{s, Array1, ArrayView1, Zip};

use super::{IterateState, Sampler, StepInfo};
use crate::error::{Error, Result};
use crate::oracles::{BatchLoss, ProblemInstance, RoundLoss};
use crate::prox::{prox_block, prox_full};
use crate::schedules::{step_size, StepSchedule};

/// `x - g / eta`, elementwise.
pub(crate) fn gradient_point(x: ArrayView1<'_, f64>, g: ArrayView1<'_, f64>, eta: f64) -> Array1<f64> {
    Zip::from(x).and(g).map_collect(|&a, &b| a - b / eta)
}

/// `x_j <- prox_j(x_j - g_j / eta)`.
pub(crate) fn block_update(
    prob: &ProblemInstance,
    x: &mut Array1<f64>,
    j: usize,
    g: ArrayView1<'_, f64>,
    eta: f64,
) -> Result<()> {
    let r = prob.partition().range(j)?;
    let z = gradient_point(x.slice(s![r.clone()]), g, eta);
    let u = prox_block(prob.reg(), j, z.view(), eta)?;
    x.slice_mut(s![r]).assign(&u);
    Ok(())
}

/// `x <- prox(x - g / eta)` over all blocks.
pub(crate) fn full_update(
    prob: &ProblemInstance,
    x: &mut Array1<f64>,
    g: ArrayView1<'_, f64>,
    eta: f64,
) -> Result<()> {
    let z = gradient_point(x.view(), g, eta);
    *x = prox_full(prob.reg(), prob.partition(), z.view(), eta)?;
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidStep(eta))
    }
}

fn random_block_step(
    state: &mut IterateState,
    loss: &impl RoundLoss,
    prob: &ProblemInstance,
    sched: &StepSchedule,
    j: usize,
) -> Result<f64> {
    let eta = step_size(sched, state.t, Some(j))?;
    check_eta(eta)?;
    let g = loss.block_grad(j, state.x.view())?;
    block_update(prob, &mut state.x, j, g.view(), eta)?;
    state.t += 1;
    Ok(eta)
}

/// One online round: update a uniformly drawn block against the revealed
/// loss `round_loss`.
pub fn orbcd_online_step(
    state: &mut IterateState,
    round_loss: &impl RoundLoss,
    prob: &ProblemInstance,
    sched: &StepSchedule,
    rng: &mut Sampler,
) -> Result<StepInfo> {
    let j = rng.draw_block(prob.num_blocks());
    let eta = random_block_step(state, round_loss, prob, sched, j)?;
    Ok(StepInfo {
        block: Some(j),
        batch: None,
        eta,
        cost_units: 1,
    })
}

/// Draw a mini-batch and a block independently, then update that block.
pub fn orbcd_stochastic_step(
    state: &mut IterateState,
    prob: &ProblemInstance,
    sched: &StepSchedule,
    rng: &mut Sampler,
) -> Result<StepInfo> {
    let i = rng.draw_batch(prob.num_batches());
    let j = rng.draw_block(prob.num_blocks());
    let loss = BatchLoss { prob, batch: i };
    let eta = random_block_step(state, &loss, prob, sched, j)?;
    Ok(StepInfo {
        block: Some(j),
        batch: Some(i),
        eta,
        cost_units: 1,
    })
}

/// Full-vector proximal step on a revealed loss.
pub fn prox_online_step(
    state: &mut IterateState,
    round_loss: &impl RoundLoss,
    prob: &ProblemInstance,
    sched: &StepSchedule,
) -> Result<StepInfo> {
    let eta = step_size(sched, state.t, None)?;
    check_eta(eta)?;
    let g = round_loss.grad(state.x.view())?;
    full_update(prob, &mut state.x, g.view(), eta)?;
    state.t += 1;
    Ok(StepInfo {
        block: None,
        batch: None,
        eta,
        cost_units: prob.num_blocks() as u64,
    })
}

/// Full-vector proximal step on one sampled mini-batch.
pub fn prox_sgd_step(
    state: &mut IterateState,
    prob: &ProblemInstance,
    sched: &StepSchedule,
    rng: &mut Sampler,
) -> Result<StepInfo> {
    let i = rng.draw_batch(prob.num_batches());
    let info = prox_online_step(state, &BatchLoss { prob, batch: i }, prob, sched)?;
    Ok(StepInfo {
        batch: Some(i),
        ..info
    })
}

/// Randomized block proximal gradient on the full objective; with the
/// per-block Lipschitz schedule the step on block `j` is `1 / L_j`.
pub fn rbcd_step(
    state: &mut IterateState,
    prob: &ProblemInstance,
    sched: &StepSchedule,
    rng: &mut Sampler,
) -> Result<StepInfo> {
    let j = rng.draw_block(prob.num_blocks());
    let eta = step_size(sched, state.t, Some(j))?;
    check_eta(eta)?;
    let g = prob.full_block_grad(j, state.x.view())?;
    block_update(prob, &mut state.x, j, g.view(), eta)?;
    state.t += 1;
    Ok(StepInfo {
        block: Some(j),
        batch: None,
        eta,
        cost_units: prob.num_batches() as u64,
    })
}

/// Deterministic proximal gradient step with the exact full gradient.
pub fn prox_gd_step(state: &mut IterateState, prob: &ProblemInstance, eta: f64) -> Result<StepInfo> {
    check_eta(eta)?;
    let g = prob.full_grad(state.x.view())?;
    full_update(prob, &mut state.x, g.view(), eta)?;
    state.t += 1;
    Ok(StepInfo {
        block: None,
        batch: None,
        eta,
        cost_units: (prob.num_batches() * prob.num_blocks()) as u64,
    })
}
