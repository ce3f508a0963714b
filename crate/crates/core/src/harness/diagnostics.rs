//! Pointwise checks of the smoothness and strong-convexity inequalities the
//! convergence analysis relies on. Each check returns both sides so callers
//! can apply their own tolerance; an inequality holds when `lhs <= rhs`.

use ndarray::{s, Array1, ArrayView1};

use crate::algorithms::{orbcd_online_step, IterateState, Sampler};
use crate::error::{check_len, Error, Result};
use crate::harness::reference::h_gap;
use crate::oracles::{BatchLoss, ProblemInstance, RoundLoss};
use crate::schedules::StepSchedule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    /// `lhs <= rhs` up to `tol` relative to the larger side (at least 1).
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol * self.lhs.abs().max(self.rhs.abs()).max(1.0)
    }
}

fn sq(v: &Array1<f64>) -> f64 {
    v.dot(v)
}

fn shifted(prob: &ProblemInstance, y: ArrayView1<'_, f64>, j: usize, h: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    let r = prob.partition().range(j)?;
    check_len(r.len(), h.len())?;
    let mut x = y.to_owned();
    let mut xj = x.slice_mut(s![r]);
    xj += &h;
    Ok(x)
}

/// `f_i(y + U_j h) <= f_i(y) + <grad_j f_i(y), h> + (L_j / 2) ||h||^2`.
pub fn block_descent(prob: &ProblemInstance, i: usize, j: usize, y: ArrayView1<'_, f64>, h: ArrayView1<'_, f64>) -> Result<Sides> {
    let l = prob.block_lipschitz_bounds().per_block[j];
    let x = shifted(prob, y, j, h)?;
    let g = prob.block_partial_grad(i, j, y)?;
    Ok(Sides {
        lhs: prob.loss_value(i, x.view())?,
        rhs: prob.loss_value(i, y)? + g.dot(&h) + 0.5 * l * h.dot(&h),
    })
}

/// `||d||^2 <= L_j <d, h>` with `d = grad_j f_i(y + U_j h) - grad_j f_i(y)`.
pub fn block_cocoercivity(
    prob: &ProblemInstance,
    i: usize,
    j: usize,
    y: ArrayView1<'_, f64>,
    h: ArrayView1<'_, f64>,
) -> Result<Sides> {
    let l = prob.block_lipschitz_bounds().per_block[j];
    let x = shifted(prob, y, j, h)?;
    let d = prob.block_partial_grad(i, j, x.view())? - prob.block_partial_grad(i, j, y)?;
    Ok(Sides {
        lhs: sq(&d),
        rhs: l * d.dot(&h),
    })
}

/// `||grad_j f(y + U_j h) - grad_j f(y)|| <= L ||h||` for the averaged `f`.
pub fn averaged_block_lipschitz(prob: &ProblemInstance, j: usize, y: ArrayView1<'_, f64>, h: ArrayView1<'_, f64>) -> Result<Sides> {
    let l = prob.block_lipschitz_bounds().global;
    let x = shifted(prob, y, j, h)?;
    let d = prob.full_block_grad(j, x.view())? - prob.full_block_grad(j, y)?;
    Ok(Sides {
        lhs: sq(&d).sqrt(),
        rhs: l * h.dot(&h).sqrt(),
    })
}

/// `(1/I) sum_i ||grad f_i(x) - grad f_i(x_star)||^2 <= L h(x, x_star)`.
pub fn gradient_distance(
    prob: &ProblemInstance,
    x: ArrayView1<'_, f64>,
    x_star: ArrayView1<'_, f64>,
    lipschitz: f64,
) -> Result<Sides> {
    let mut total = 0.0;
    for i in 0..prob.num_batches() {
        total += sq(&(prob.batch_grad(i, x)? - prob.batch_grad(i, x_star)?));
    }
    Ok(Sides {
        lhs: total / prob.num_batches() as f64,
        rhs: lipschitz * h_gap(prob, x, x_star)?,
    })
}

/// The two h-gap inequalities: `F(x) - F* <= h(x, x_star)` and
/// `(gamma / 2) ||x - x_star||^2 <= F(x) - F*`.
pub fn h_gap_sandwich(
    prob: &ProblemInstance,
    x: ArrayView1<'_, f64>,
    x_star: ArrayView1<'_, f64>,
    f_star: f64,
) -> Result<(Sides, Sides)> {
    let gap = prob.objective(x)? - f_star;
    let h = h_gap(prob, x, x_star)?;
    let dist = sq(&(&x - &x_star));
    Ok((
        Sides { lhs: gap, rhs: h },
        Sides {
            lhs: 0.5 * prob.gamma() * dist,
            rhs: gap,
        },
    ))
}

/// Left-hand side used for the per-step online inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepInequality {
    /// `<grad_j f_t(x^t) + g_j'(x^t_j), x^t_j - x_j>`; needs a smooth `g_j`.
    Subgradient,
    /// `<grad_j f_t(x^t), x^t_j - x_j> + g_j(x^t_j) - g_j(x_j)`.
    FunctionValue,
}

/// One ORBCD step from `x_t` to `x_next` on block `j` with step `eta`
/// against the comparator `x_ref`. The right-hand side is
/// `(eta/2)(||x_ref - x_t||^2 - ||x_ref - x_next||^2)
///  + ||grad_j f_t(x_t)||^2 / (2 (eta - L)) + g(x_t) - g(x_next)`.
#[allow(clippy::too_many_arguments)]
pub fn online_step_inequality(
    prob: &ProblemInstance,
    round_loss: &impl RoundLoss,
    j: usize,
    x_t: ArrayView1<'_, f64>,
    x_next: ArrayView1<'_, f64>,
    x_ref: ArrayView1<'_, f64>,
    eta: f64,
    lipschitz: f64,
    form: StepInequality,
) -> Result<Sides> {
    if eta <= lipschitz {
        return Err(Error::InfeasibleParameters(format!("eta = {eta} must exceed L = {lipschitz}")));
    }
    let r = prob.partition().range(j)?;
    let penalty = prob.reg().penalty(j)?;
    let g = round_loss.block_grad(j, x_t)?;
    let xt_j = x_t.slice(s![r.clone()]);
    let ref_j = x_ref.slice(s![r]);
    let diff = &xt_j - &ref_j;
    let lhs = match form {
        StepInequality::Subgradient => {
            let sub = penalty.gradient(xt_j).ok_or_else(|| {
                Error::Usage(format!("block {j} penalty is not differentiable; use the function-value form"))
            })?;
            (&g + &sub).dot(&diff)
        }
        StepInequality::FunctionValue => g.dot(&diff) + penalty.value(xt_j) - penalty.value(ref_j),
    };
    let rhs = 0.5 * eta * (sq(&(&x_ref - &x_t)) - sq(&(&x_ref - &x_next)))
        + sq(&g) / (2.0 * (eta - lipschitz))
        + prob.reg_value(x_t)?
        - prob.reg_value(x_next)?;
    Ok(Sides { lhs, rhs })
}

/// Run online ORBCD on `work` (one sample per round, cyclic) for `rounds`
/// steps and evaluate the per-step inequality at each one.
pub fn online_step_inequality_run(
    work: &ProblemInstance,
    x_ref: ArrayView1<'_, f64>,
    sched: &StepSchedule,
    rounds: u64,
    seed: u64,
    form: StepInequality,
) -> Result<Vec<Sides>> {
    let lipschitz = work.block_lipschitz_bounds().global;
    let mut state = IterateState::zeros(work.dim());
    let mut rng = Sampler::new(seed);
    let mut out = Vec::with_capacity(rounds as usize);
    for t in 1..=rounds {
        let round = ((t - 1) % work.num_batches() as u64) as usize;
        let loss = BatchLoss { prob: work, batch: round };
        let before = state.x.clone();
        let info = orbcd_online_step(&mut state, &loss, work, sched, &mut rng)?;
        out.push(online_step_inequality(
            work,
            &loss,
            info.block.expect("block step"),
            before.view(),
            state.x.view(),
            x_ref,
            info.eta,
            lipschitz,
            form,
        )?);
    }
    Ok(out)
}
