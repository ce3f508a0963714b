//! Online and stochastic randomized block coordinate descent for composite
//! objectives `f(x) + g(x)` with block-separable `g`, a variance-reduced
//! variant, baseline solvers and a measurement harness.

pub mod algorithms;
pub mod blocks;
pub mod error;
pub mod harness;
pub mod oracles;
pub mod prox;
pub mod schedules;

pub use blocks::{extract_block, make_partition, scatter_block, BlockPartition};
pub use error::{Error, Result};
pub use oracles::{contiguous_batches, BatchLoss, LipschitzInfo, LossKind, ProblemInstance, RoundLoss};
pub use prox::{prox_block, prox_full, reg_value, Penalty, RegularizerSpec};
pub use schedules::{step_size, StepSchedule};
