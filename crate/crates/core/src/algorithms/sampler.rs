use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded source of mini-batch and block indices.
///
/// Batches and blocks come from two independent streams of the same ChaCha8
/// key, so a solver that only draws blocks sees the same block sequence as
/// one that draws both.
#[derive(Debug, Clone)]
pub struct Sampler {
    seed: u64,
    batches: ChaCha8Rng,
    blocks: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        let mut batches = ChaCha8Rng::seed_from_u64(seed);
        batches.set_stream(0);
        let mut blocks = ChaCha8Rng::seed_from_u64(seed);
        blocks.set_stream(1);
        Self {
            seed,
            batches,
            blocks,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform mini-batch index in `0..num_batches`.
    pub fn draw_batch(&mut self, num_batches: usize) -> usize {
        self.batches.random_range(0..num_batches)
    }

    /// Uniform block index in `0..num_blocks`.
    pub fn draw_block(&mut self, num_blocks: usize) -> usize {
        self.blocks.random_range(0..num_blocks)
    }
}
