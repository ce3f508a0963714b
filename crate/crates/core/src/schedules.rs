//! Step-size laws. `t` is 1-indexed.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    /// `sqrt(t) + L`
    ConvexSqrt { lipschitz: f64 },
    /// `gamma * t / J + L`
    StronglyConvex {
        lipschitz: f64,
        gamma: f64,
        num_blocks: usize,
    },
    Constant { eta: f64 },
    /// `L_j` for the block being updated.
    PerBlockLipschitz { per_block: Vec<f64> },
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl StepSchedule {
    pub fn convex_sqrt(lipschitz: f64) -> Result<Self> {
        check_nonneg("L", lipschitz)?;
        Ok(Self::ConvexSqrt { lipschitz })
    }

    pub fn strongly_convex(lipschitz: f64, gamma: f64, num_blocks: usize) -> Result<Self> {
        check_nonneg("L", lipschitz)?;
        check_pos("gamma", gamma)?;
        if num_blocks == 0 {
            return Err(Error::Config("J must be at least 1".into()));
        }
        Ok(Self::StronglyConvex {
            lipschitz,
            gamma,
            num_blocks,
        })
    }

    pub fn constant(eta: f64) -> Result<Self> {
        check_pos("eta", eta)?;
        Ok(Self::Constant { eta })
    }

    pub fn per_block_lipschitz(per_block: Vec<f64>) -> Result<Self> {
        if per_block.is_empty() {
            return Err(Error::Config("per-block schedule needs at least one block".into()));
        }
        for &l in &per_block {
            check_pos("L_j", l)?;
        }
        Ok(Self::PerBlockLipschitz { per_block })
    }

    /// Whether `step_size` needs the block index.
    pub fn needs_block(&self) -> bool {
        matches!(self, Self::PerBlockLipschitz { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ConvexSqrt { .. } => "convex_sqrt",
            Self::StronglyConvex { .. } => "strongly_convex",
            Self::Constant { .. } => "constant",
            Self::PerBlockLipschitz { .. } => "per_block_lipschitz",
        }
    }
}

/// `eta_t` for round `t >= 1`, updating block `j` when the law needs it.
pub fn step_size(s: &StepSchedule, t: u64, j: Option<usize>) -> Result<f64> {
    if t == 0 {
        return Err(Error::Usage("rounds are counted from t = 1".into()));
    }
    Ok(match s {
        StepSchedule::ConvexSqrt { lipschitz } => (t as f64).sqrt() + lipschitz,
        StepSchedule::StronglyConvex {
            lipschitz,
            gamma,
            num_blocks,
        } => gamma * t as f64 / *num_blocks as f64 + lipschitz,
        StepSchedule::Constant { eta } => *eta,
        StepSchedule::PerBlockLipschitz { per_block } => {
            let j = j.ok_or_else(|| {
                Error::Usage("per-block Lipschitz schedule needs the block index".into())
            })?;
            *per_block.get(j).ok_or(Error::Index {
                what: "block",
                index: j,
                limit: per_block.len(),
            })?
        }
    })
}
