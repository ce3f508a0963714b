//! High-precision reference optimum and the h-gap measure.

use ndarray::{Array1, ArrayView1};

use crate::algorithms::{prox_gd_step, IterateState};
use crate::error::{check_len, Error, Result};
use crate::oracles::ProblemInstance;

pub const ITERATION_CAP: usize = 10_000_000;

/// Step parameter used by [`solve_reference`]: the larger of the block and
/// full-vector Lipschitz constants of `f`, so the full proximal gradient
/// step is a descent step.
pub fn reference_step(prob: &ProblemInstance) -> f64 {
    let eta = prob.block_lipschitz_bounds().global.max(prob.smooth_lipschitz());
    if eta > 0.0 {
        eta
    } else {
        1.0
    }
}

/// Proximal gradient descent from zero until `eta * ||x - step(x)|| <= tol`.
pub fn solve_reference(prob: &ProblemInstance, tol: f64) -> Result<(Array1<f64>, f64)> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("reference tolerance {tol} must be > 0")));
    }
    let eta = reference_step(prob);
    let mut state = IterateState::zeros(prob.dim());
    let mut residual = f64::INFINITY;
    for _ in 0..ITERATION_CAP {
        let before = state.x.clone();
        prox_gd_step(&mut state, prob, eta)?;
        residual = eta * (&state.x - &before).mapv(|v| v * v).sum().sqrt();
        if residual <= tol {
            let f_star = prob.objective(state.x.view())?;
            return Ok((state.x, f_star));
        }
    }
    Err(Error::NonConvergence {
        iterations: ITERATION_CAP,
        residual,
    })
}

/// `<grad f(x), x - x_star> + g(x) - g(x_star)`.
pub fn h_gap(prob: &ProblemInstance, x: ArrayView1<'_, f64>, x_star: ArrayView1<'_, f64>) -> Result<f64> {
    check_len(prob.dim(), x.len())?;
    check_len(prob.dim(), x_star.len())?;
    let g = prob.full_grad(x)?;
    let diff = &x - &x_star;
    Ok(g.dot(&diff) + prob.reg_value(x)? - prob.reg_value(x_star)?)
}
