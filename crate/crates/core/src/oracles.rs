//! Smooth-part oracles: mini-batch losses, block partial gradients, the
//! full gradient and block-wise Lipschitz bounds.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{s, Array1, Array2, ArrayView1};

use crate::blocks::BlockPartition;
use crate::error::{check_len, Error, Result};
use crate::prox::{reg_value, RegularizerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `0.5 * (u - b)^2`
    Squared,
    /// `log(1 + exp(-b * u))` with `b` in `{-1, +1}`
    Logistic,
}

impl LossKind {
    #[inline]
    pub fn value(self, u: f64, b: f64) -> f64 {
        match self {
            LossKind::Squared => 0.5 * (u - b) * (u - b),
            LossKind::Logistic => softplus(-b * u),
        }
    }

    /// Derivative with respect to the margin `u`.
    #[inline]
    pub fn derivative(self, u: f64, b: f64) -> f64 {
        match self {
            LossKind::Squared => u - b,
            LossKind::Logistic => -b * sigmoid(-b * u),
        }
    }

    /// Upper bound on the second derivative in `u`.
    pub fn curvature_bound(self) -> f64 {
        match self {
            LossKind::Squared => 1.0,
            LossKind::Logistic => 0.25,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Squared => "squared",
            LossKind::Logistic => "logistic",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(LossKind::Squared),
            "logistic" => Ok(LossKind::Logistic),
            other => Err(Error::Config(format!("unknown loss kind `{other}`"))),
        }
    }
}

fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Block-wise Lipschitz constants of the mini-batch gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzInfo {
    pub per_block: Vec<f64>,
    pub global: f64,
}

impl LipschitzInfo {
    pub fn from_blocks(per_block: Vec<f64>) -> Self {
        let global = per_block.iter().copied().fold(0.0, f64::max);
        Self { per_block, global }
    }
}

/// Composite problem `(1/I) sum_i f_i(x) + sum_j g_j(x_j)` where each `f_i`
/// averages a loss over one mini-batch of rows of the design matrix.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    design: Array2<f64>,
    targets: Array1<f64>,
    batches: Vec<Vec<usize>>,
    loss: LossKind,
    partition: BlockPartition,
    reg: RegularizerSpec,
    gamma: f64,
}

/// Split rows `0..m` into `num_batches` contiguous groups of near-equal size.
pub fn contiguous_batches(m: usize, num_batches: usize) -> Result<Vec<Vec<usize>>> {
    if num_batches == 0 || num_batches > m {
        return Err(Error::Config(format!(
            "cannot split {m} samples into {num_batches} nonempty mini-batches"
        )));
    }
    let base = m / num_batches;
    let extra = m % num_batches;
    let mut start = 0;
    Ok((0..num_batches)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let rows = (start..start + len).collect();
            start += len;
            rows
        })
        .collect())
}

impl ProblemInstance {
    pub fn new(
        design: Array2<f64>,
        targets: Array1<f64>,
        batches: Vec<Vec<usize>>,
        loss: LossKind,
        partition: BlockPartition,
        reg: RegularizerSpec,
        gamma: f64,
    ) -> Result<Self> {
        let (m, n) = design.dim();
        check_len(m, targets.len())?;
        check_len(n, partition.dim())?;
        check_len(partition.num_blocks(), reg.num_blocks())?;
        if batches.is_empty() {
            return Err(Error::Config("need at least one mini-batch".into()));
        }
        let mut seen = vec![false; m];
        for (i, rows) in batches.iter().enumerate() {
            if rows.is_empty() {
                return Err(Error::Config(format!("mini-batch {i} is empty")));
            }
            for &r in rows {
                if r >= m || std::mem::replace(&mut seen[r], true) {
                    return Err(Error::Config(format!(
                        "mini-batch {i}: row {r} is out of range or already assigned"
                    )));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Config("mini-batches do not cover every sample".into()));
        }
        if loss == LossKind::Logistic && targets.iter().any(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::Config("logistic labels must be -1 or +1".into()));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("gamma {gamma} must be finite and >= 0")));
        }
        Ok(Self {
            design,
            targets,
            batches,
            loss,
            partition,
            reg,
            gamma,
        })
    }

    pub fn design(&self) -> &Array2<f64> {
        &self.design
    }

    pub fn targets(&self) -> &Array1<f64> {
        &self.targets
    }

    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn reg(&self) -> &RegularizerSpec {
        &self.reg
    }

    /// Strong-convexity modulus of `f + g` known by construction (0 if none).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.design.ncols()
    }

    pub fn num_samples(&self) -> usize {
        self.design.nrows()
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.num_blocks()
    }

    /// Same data and regularizer with every sample in its own mini-batch.
    pub fn per_sample_view(&self) -> Self {
        Self {
            batches: (0..self.num_samples()).map(|s| vec![s]).collect(),
            ..self.clone()
        }
    }

    /// Copy with a different regularizer and strong-convexity modulus.
    pub fn with_regularizer(&self, reg: RegularizerSpec, gamma: f64) -> Result<Self> {
        Self::new(
            self.design.clone(),
            self.targets.clone(),
            self.batches.clone(),
            self.loss,
            self.partition.clone(),
            reg,
            gamma,
        )
    }

    fn check_batch(&self, i: usize) -> Result<()> {
        if i < self.batches.len() {
            Ok(())
        } else {
            Err(Error::Index {
                what: "mini-batch",
                index: i,
                limit: self.batches.len(),
            })
        }
    }

    /// `f_i(x)`: average loss over the rows of mini-batch `i`.
    pub fn loss_value(&self, i: usize, x: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_batch(i)?;
        check_len(self.dim(), x.len())?;
        let rows = &self.batches[i];
        let total: f64 = rows
            .iter()
            .map(|&r| self.loss.value(self.design.row(r).dot(&x), self.targets[r]))
            .sum();
        Ok(total / rows.len() as f64)
    }

    /// Coordinates `range` of `grad f_i(x)`. Every coordinate is accumulated
    /// in the same order whatever the requested range, so block and full
    /// gradients agree bit for bit.
    fn grad_range(&self, i: usize, range: Range<usize>, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let rows = &self.batches[i];
        let mut g = Array1::zeros(range.len());
        for &r in rows {
            let a = self.design.row(r);
            let w = self.loss.derivative(a.dot(&x), self.targets[r]);
            g.scaled_add(w, &a.slice(s![range.clone()]));
        }
        let count = rows.len() as f64;
        g.mapv_inplace(|v| v / count);
        g
    }

    /// `grad_j f_i(x)`.
    pub fn block_partial_grad(&self, i: usize, j: usize, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        self.check_batch(i)?;
        check_len(self.dim(), x.len())?;
        let r = self.partition.range(j)?;
        Ok(self.grad_range(i, r, x))
    }

    /// `grad f_i(x)`.
    pub fn batch_grad(&self, i: usize, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        self.check_batch(i)?;
        check_len(self.dim(), x.len())?;
        Ok(self.grad_range(i, 0..self.dim(), x))
    }

    fn averaged_grad(&self, range: Range<usize>, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut acc = self.grad_range(0, range.clone(), x);
        for i in 1..self.num_batches() {
            acc += &self.grad_range(i, range.clone(), x);
        }
        let count = self.num_batches() as f64;
        acc.mapv_inplace(|v| v / count);
        acc
    }

    /// `grad f(x) = (1/I) sum_i grad f_i(x)`.
    pub fn full_grad(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_len(self.dim(), x.len())?;
        Ok(self.averaged_grad(0..self.dim(), x))
    }

    /// `grad_j f(x)`, the batch-averaged block partial gradient.
    pub fn full_block_grad(&self, j: usize, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_len(self.dim(), x.len())?;
        let r = self.partition.range(j)?;
        Ok(self.averaged_grad(r, x))
    }

    /// `f(x)`.
    pub fn smooth_value(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..self.num_batches() {
            total += self.loss_value(i, x)?;
        }
        Ok(total / self.num_batches() as f64)
    }

    /// `g(x)`.
    pub fn reg_value(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        reg_value(&self.reg, &self.partition, x)
    }

    /// `f(x) + g(x)`.
    pub fn objective(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        Ok(self.smooth_value(x)? + self.reg_value(x)?)
    }

    /// Block Lipschitz bounds: for block `j`, the maximum over mini-batches
    /// of `lambda_max(A_ij^T A_ij) / |batch_i|`, scaled by the loss curvature.
    pub fn block_lipschitz_bounds(&self) -> LipschitzInfo {
        let curvature = self.loss.curvature_bound();
        let per_block = self
            .partition
            .ranges()
            .map(|r| {
                self.batches
                    .iter()
                    .map(|rows| {
                        let sub = DMatrix::from_fn(rows.len(), r.len(), |a, c| {
                            self.design[[rows[a], r.start + c]]
                        });
                        largest_eigenvalue(sub.transpose() * &sub) / rows.len() as f64
                    })
                    .fold(0.0, f64::max)
                    * curvature
            })
            .collect();
        LipschitzInfo::from_blocks(per_block)
    }

    /// Largest Lipschitz constant of the full gradients of the individual
    /// mini-batch losses `f_i`.
    pub fn batch_lipschitz(&self) -> f64 {
        let n = self.dim();
        self.batches
            .iter()
            .map(|rows| {
                let sub = DMatrix::from_fn(rows.len(), n, |a, c| self.design[[rows[a], c]]);
                largest_eigenvalue(sub.transpose() * &sub) / rows.len() as f64
            })
            .fold(0.0, f64::max)
            * self.loss.curvature_bound()
    }

    /// Lipschitz constant of the full gradient of the averaged `f`.
    pub fn smooth_lipschitz(&self) -> f64 {
        let n = self.dim();
        let mut hessian = DMatrix::zeros(n, n);
        for rows in &self.batches {
            let sub = DMatrix::from_fn(rows.len(), n, |a, c| self.design[[rows[a], c]]);
            hessian += (sub.transpose() * &sub) / rows.len() as f64;
        }
        hessian /= self.num_batches() as f64;
        largest_eigenvalue(hessian) * self.loss.curvature_bound()
    }
}

fn largest_eigenvalue(sym: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// A smooth loss revealed for one round or one sampled mini-batch.
pub trait RoundLoss {
    fn value(&self, x: ArrayView1<'_, f64>) -> Result<f64>;
    fn block_grad(&self, j: usize, x: ArrayView1<'_, f64>) -> Result<Array1<f64>>;
    fn grad(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>>;
}

/// Mini-batch `batch` of a problem, viewed as a standalone loss.
#[derive(Debug, Clone, Copy)]
pub struct BatchLoss<'a> {
    pub prob: &'a ProblemInstance,
    pub batch: usize,
}

impl RoundLoss for BatchLoss<'_> {
    fn value(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        self.prob.loss_value(self.batch, x)
    }

    fn block_grad(&self, j: usize, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        self.prob.block_partial_grad(self.batch, j, x)
    }

    fn grad(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        self.prob.batch_grad(self.batch, x)
    }
}
