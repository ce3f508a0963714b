//! Seeded synthetic regression and classification problems.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::blocks::make_partition;
use crate::error::{Error, Result};
use crate::oracles::{contiguous_batches, LossKind, ProblemInstance};
use crate::prox::{Penalty, RegularizerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Lasso,
    GroupLasso,
    SparseGroupLasso,
    ElasticNet,
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lasso" => Ok(Self::Lasso),
            "group_lasso" => Ok(Self::GroupLasso),
            "sparse_group_lasso" => Ok(Self::SparseGroupLasso),
            "elastic_net" => Ok(Self::ElasticNet),
            other => Err(Error::Config(format!("unknown problem kind `{other}`"))),
        }
    }
}

/// Strength of the ridge term of an elastic-net problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RidgeStrength {
    Absolute(f64),
    /// A multiple of the largest block Lipschitz constant of the losses.
    TimesLipschitz(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub loss: LossKind,
    pub n: usize,
    pub m: usize,
    pub num_batches: usize,
    pub num_blocks: usize,
    pub noise: f64,
    /// Fraction of blocks of the ground truth that are nonzero.
    pub sparsity: f64,
    /// l1 weight (lasso, elastic net) or group weight (group penalties).
    pub lambda: f64,
    /// l1 weight inside the sparse-group penalty.
    pub lambda2: f64,
    pub ridge: RidgeStrength,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, n: usize, m: usize, num_batches: usize, num_blocks: usize) -> Self {
        Self {
            kind,
            loss: LossKind::Squared,
            n,
            m,
            num_batches,
            num_blocks,
            noise: 0.1,
            sparsity: 0.25,
            lambda: 0.1,
            lambda2: 0.05,
            ridge: RidgeStrength::Absolute(0.1),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Config("n and m must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.sparsity) {
            return Err(Error::Config(format!("sparsity {} outside [0, 1]", self.sparsity)));
        }
        let weights = [self.noise, self.lambda, self.lambda2];
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Config("noise and penalty weights must be finite and >= 0".into()));
        }
        Ok(())
    }
}

struct Draw {
    design: Array2<f64>,
    truth: Array1<f64>,
    targets: Array1<f64>,
}

fn draw(spec: &ProblemSpec, seed: u64) -> Result<Draw> {
    spec.validate()?;
    let partition = make_partition(spec.n, spec.num_blocks)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };

    let design = Array2::from_shape_simple_fn((spec.m, spec.n), &mut normal);
    let active = (spec.sparsity * spec.num_blocks as f64).floor() as usize;
    let mut pick = ChaCha8Rng::seed_from_u64(seed);
    pick.set_stream(1);
    let mut chosen = rand::seq::index::sample(&mut pick, spec.num_blocks, active).into_vec();
    chosen.sort_unstable();
    let mut truth = Array1::zeros(spec.n);
    for j in chosen {
        for c in partition.range(j)? {
            truth[c] = normal();
        }
    }
    let targets = design.dot(&truth).mapv(|u| {
        let y = u + spec.noise * normal();
        match spec.loss {
            LossKind::Squared => y,
            LossKind::Logistic => {
                if y >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    });
    Ok(Draw {
        design,
        truth,
        targets,
    })
}

/// Draw a problem: standard normal design, block-sparse ground truth with
/// `floor(sparsity * J)` nonzero blocks, noisy responses (or their signs for
/// the logistic loss) and the regularizer named by `spec.kind`.
pub fn gen_synthetic(spec: &ProblemSpec, seed: u64) -> Result<ProblemInstance> {
    let Draw {
        design, targets, ..
    } = draw(spec, seed)?;
    let unregularized = ProblemInstance::new(
        design,
        targets,
        contiguous_batches(spec.m, spec.num_batches)?,
        spec.loss,
        make_partition(spec.n, spec.num_blocks)?,
        RegularizerSpec::zero(spec.num_blocks),
        0.0,
    )?;
    let (penalty, gamma) = match spec.kind {
        ProblemKind::Lasso => (Penalty::L1(spec.lambda), 0.0),
        ProblemKind::GroupLasso => (Penalty::GroupL2(spec.lambda), 0.0),
        ProblemKind::SparseGroupLasso => (
            Penalty::SparseGroup {
                group: spec.lambda,
                l1: spec.lambda2,
            },
            0.0,
        ),
        ProblemKind::ElasticNet => {
            let ridge = match spec.ridge {
                RidgeStrength::Absolute(r) => r,
                RidgeStrength::TimesLipschitz(c) => c * unregularized.block_lipschitz_bounds().global,
            };
            if !(ridge > 0.0 && ridge.is_finite()) {
                return Err(Error::Config(format!("elastic net needs a ridge weight > 0, got {ridge}")));
            }
            (Penalty::ElasticNet { l1: spec.lambda, ridge }, ridge)
        }
    };
    let reg = RegularizerSpec::uniform(penalty, spec.num_blocks)?;
    unregularized.with_regularizer(reg, gamma)
}

/// Ground-truth coefficients behind [`gen_synthetic`] for this spec and seed.
pub fn ground_truth(spec: &ProblemSpec, seed: u64) -> Result<Array1<f64>> {
    draw(spec, seed).map(|d| d.truth)
}
