//! Variance-reduced solvers: the block method and full-vector proximal SVRG.

use ndarray::{s, Array1, ArrayView1, Zip};

use super::steps::{block_update, full_update};
use super::Sampler;
use crate::error::{check_len, Error, Result};
use crate::harness::h_gap;
use crate::oracles::ProblemInstance;

/// Anchor point of an outer stage and its cached full gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct VRStageState {
    x_tilde: Array1<f64>,
    mu_tilde: Array1<f64>,
    blocks_fresh: Vec<bool>,
}

impl VRStageState {
    /// Anchor at `x_tilde` with the full gradient computed up front.
    pub fn new(prob: &ProblemInstance, x_tilde: Array1<f64>) -> Result<Self> {
        let mu_tilde = prob.full_grad(x_tilde.view())?;
        Ok(Self {
            x_tilde,
            mu_tilde,
            blocks_fresh: vec![true; prob.num_blocks()],
        })
    }

    /// Anchor at `x_tilde` with every cached block marked stale.
    pub fn lazy(prob: &ProblemInstance, x_tilde: Array1<f64>) -> Result<Self> {
        check_len(prob.dim(), x_tilde.len())?;
        Ok(Self {
            mu_tilde: Array1::zeros(x_tilde.len()),
            x_tilde,
            blocks_fresh: vec![false; prob.num_blocks()],
        })
    }

    /// Compute block `j` of the cached gradient if it is stale. Returns the
    /// cost in block units.
    pub fn refresh_block(&mut self, prob: &ProblemInstance, j: usize) -> Result<u64> {
        prob.partition().check_block(j)?;
        if self.blocks_fresh[j] {
            return Ok(0);
        }
        let r = prob.partition().range(j)?;
        let g = prob.full_block_grad(j, self.x_tilde.view())?;
        self.mu_tilde.slice_mut(s![r]).assign(&g);
        self.blocks_fresh[j] = true;
        Ok(prob.num_batches() as u64)
    }

    pub fn x_tilde(&self) -> &Array1<f64> {
        &self.x_tilde
    }

    pub fn mu_tilde(&self) -> &Array1<f64> {
        &self.mu_tilde
    }

    pub fn is_fresh(&self, j: usize) -> bool {
        self.blocks_fresh.get(j).copied().unwrap_or(false)
    }

    pub fn all_fresh(&self) -> bool {
        self.blocks_fresh.iter().all(|&f| f)
    }
}

/// `grad_j f_i(x) - grad_j f_i(x_tilde) + mu_tilde_j`.
///
/// With a single mini-batch the correction is identically zero and the
/// plain block gradient is returned.
pub fn vr_gradient(
    prob: &ProblemInstance,
    vr: &VRStageState,
    i: usize,
    j: usize,
    x: ArrayView1<'_, f64>,
) -> Result<Array1<f64>> {
    prob.partition().check_block(j)?;
    if !vr.blocks_fresh[j] {
        return Err(Error::Consistency(j));
    }
    let at_x = prob.block_partial_grad(i, j, x)?;
    if prob.num_batches() == 1 {
        return Ok(at_x);
    }
    let at_anchor = prob.block_partial_grad(i, j, vr.x_tilde.view())?;
    let r = prob.partition().range(j)?;
    Ok(Zip::from(&at_x)
        .and(&at_anchor)
        .and(vr.mu_tilde.slice(s![r]))
        .map_collect(|&a, &b, &mu| (a - b) + mu))
}

/// Which inner iterate an outer stage hands to the next one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    Last,
    Average,
    /// Inner iterate with the smallest h-gap against a supplied reference.
    BestH,
}

impl std::str::FromStr for OutputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last" => Ok(Self::Last),
            "average" => Ok(Self::Average),
            "best_h" => Ok(Self::BestH),
            other => Err(Error::Config(format!("unknown output mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VrOptions<'a> {
    pub eta: f64,
    pub m: usize,
    pub output: OutputMode,
    /// Needed by [`OutputMode::BestH`].
    pub reference: Option<ArrayView1<'a, f64>>,
    /// Fill the cached gradient one block at a time, on first use.
    pub incremental_refresh: bool,
}

impl<'a> VrOptions<'a> {
    pub fn new(eta: f64, m: usize) -> Self {
        Self {
            eta,
            m,
            output: OutputMode::Last,
            reference: None,
            incremental_refresh: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidStep(self.eta));
        }
        if self.m == 0 {
            return Err(Error::Usage("inner loop length m must be at least 1".into()));
        }
        if self.output == OutputMode::BestH && self.reference.is_none() {
            return Err(Error::Usage("best_h output needs a reference point".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub x: Array1<f64>,
    pub cost_units: u64,
}

struct OutputTracker<'a> {
    mode: OutputMode,
    reference: Option<ArrayView1<'a, f64>>,
    sum: Array1<f64>,
    best: Option<(f64, Array1<f64>)>,
}

impl<'a> OutputTracker<'a> {
    fn new(opts: &VrOptions<'a>, n: usize) -> Self {
        Self {
            mode: opts.output,
            reference: opts.reference,
            sum: Array1::zeros(n),
            best: None,
        }
    }

    fn observe(&mut self, prob: &ProblemInstance, x: &Array1<f64>) -> Result<()> {
        match self.mode {
            OutputMode::Last => {}
            OutputMode::Average => self.sum += x,
            OutputMode::BestH => {
                let reference = self.reference.expect("validated");
                let h = h_gap(prob, x.view(), reference)?;
                if self.best.as_ref().is_none_or(|(b, _)| h < *b) {
                    self.best = Some((h, x.clone()));
                }
            }
        }
        Ok(())
    }

    fn finish(self, last: Array1<f64>, m: usize) -> Array1<f64> {
        match self.mode {
            OutputMode::Last => last,
            OutputMode::Average => self.sum / m as f64,
            OutputMode::BestH => self.best.map(|(_, x)| x).unwrap_or(last),
        }
    }
}

/// One outer stage of the block variance-reduced method: anchor at `x_t`,
/// then `m` inner steps each updating one sampled block with the
/// variance-reduced gradient of one sampled mini-batch at constant `eta`.
pub fn orbcdvd_outer_stage(
    x_t: ArrayView1<'_, f64>,
    prob: &ProblemInstance,
    opts: &VrOptions<'_>,
    rng: &mut Sampler,
) -> Result<StageOutcome> {
    opts.validate()?;
    check_len(prob.dim(), x_t.len())?;
    let mut cost_units = 0;
    let mut vr = if opts.incremental_refresh {
        VRStageState::lazy(prob, x_t.to_owned())?
    } else {
        cost_units += (prob.num_batches() * prob.num_blocks()) as u64;
        VRStageState::new(prob, x_t.to_owned())?
    };
    let mut x = x_t.to_owned();
    let mut tracker = OutputTracker::new(opts, x.len());
    for _ in 0..opts.m {
        let i = rng.draw_batch(prob.num_batches());
        let j = rng.draw_block(prob.num_blocks());
        cost_units += vr.refresh_block(prob, j)?;
        let v = vr_gradient(prob, &vr, i, j, x.view())?;
        block_update(prob, &mut x, j, v.view(), opts.eta)?;
        cost_units += 1;
        tracker.observe(prob, &x)?;
    }
    Ok(StageOutcome {
        x: tracker.finish(x, opts.m),
        cost_units,
    })
}

/// One outer stage of proximal SVRG: full-vector variance-reduced gradient
/// of one sampled mini-batch and a full proximal step, `m` times.
pub fn prox_svrg_outer_stage(
    x_t: ArrayView1<'_, f64>,
    prob: &ProblemInstance,
    opts: &VrOptions<'_>,
    rng: &mut Sampler,
) -> Result<StageOutcome> {
    opts.validate()?;
    check_len(prob.dim(), x_t.len())?;
    let full_cost = (prob.num_batches() * prob.num_blocks()) as u64;
    let x_tilde = x_t.to_owned();
    let mu_tilde = prob.full_grad(x_tilde.view())?;
    let mut cost_units = full_cost;
    let mut x = x_tilde.clone();
    let mut tracker = OutputTracker::new(opts, x.len());
    for _ in 0..opts.m {
        let i = rng.draw_batch(prob.num_batches());
        let at_x = prob.batch_grad(i, x.view())?;
        let v = if prob.num_batches() == 1 {
            at_x
        } else {
            let at_anchor = prob.batch_grad(i, x_tilde.view())?;
            Zip::from(&at_x)
                .and(&at_anchor)
                .and(&mu_tilde)
                .map_collect(|&a, &b, &mu| (a - b) + mu)
        };
        full_update(prob, &mut x, v.view(), opts.eta)?;
        cost_units += prob.num_blocks() as u64;
        tracker.observe(prob, &x)?;
    }
    Ok(StageOutcome {
        x: tracker.finish(x, opts.m),
        cost_units,
    })
}
