//! Non-overlapping contiguous coordinate blocks of the decision vector.
//!
//! A block selector is represented by its offset and length, so selecting a
//! block or writing it back is a slice operation rather than a product with
//! columns of a permutation matrix.

use std::ops::Range;

use ndarray::{s, Array1, ArrayView1, ArrayViewMut1};

use crate::error::{check_len, Error, Result};

/// Partition of `0..n` into `J` contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    n: usize,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockPartition {
    /// Even split of `n` coordinates into `num_blocks` blocks; the remainder
    /// goes one coordinate at a time to the leading blocks.
    pub fn uniform(n: usize, num_blocks: usize) -> Result<Self> {
        if num_blocks == 0 {
            return Err(Error::InvalidPartition("need at least one block".into()));
        }
        if num_blocks > n {
            return Err(Error::InvalidPartition(format!(
                "{num_blocks} blocks cannot cover {n} coordinates"
            )));
        }
        let base = n / num_blocks;
        let extra = n % num_blocks;
        let sizes = (0..num_blocks)
            .map(|j| base + usize::from(j < extra))
            .collect();
        Self::from_sizes(sizes)
    }

    /// Partition with explicit block lengths, laid out in order.
    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidPartition("need at least one block".into()));
        }
        if let Some(j) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidPartition(format!("block {j} is empty")));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut n = 0;
        for &size in &sizes {
            offsets.push(n);
            n += size;
        }
        Ok(Self { n, sizes, offsets })
    }

    /// Ambient dimension.
    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of blocks `J`.
    #[inline]
    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    #[inline]
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    #[inline]
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn block_size(&self, j: usize) -> Result<usize> {
        self.check_block(j)?;
        Ok(self.sizes[j])
    }

    /// Coordinate range of block `j`.
    pub fn range(&self, j: usize) -> Result<Range<usize>> {
        self.check_block(j)?;
        Ok(self.offsets[j]..self.offsets[j] + self.sizes[j])
    }

    /// Iterator over all block ranges in order.
    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.offsets
            .iter()
            .zip(&self.sizes)
            .map(|(&o, &s)| o..o + s)
    }

    pub fn check_block(&self, j: usize) -> Result<()> {
        if j < self.sizes.len() {
            Ok(())
        } else {
            Err(Error::Index {
                what: "block",
                index: j,
                limit: self.sizes.len(),
            })
        }
    }

    /// Borrow block `j` of `x`.
    pub fn extract<'a>(&self, x: ArrayView1<'a, f64>, j: usize) -> Result<ArrayView1<'a, f64>> {
        check_len(self.n, x.len())?;
        let r = self.range(j)?;
        Ok(x.slice_move(s![r]))
    }

    /// Mutable view of block `j` of `x`.
    pub fn extract_mut<'a>(
        &self,
        x: ArrayViewMut1<'a, f64>,
        j: usize,
    ) -> Result<ArrayViewMut1<'a, f64>> {
        check_len(self.n, x.len())?;
        let r = self.range(j)?;
        Ok(x.slice_move(s![r]))
    }

    /// Overwrite block `j` of `x` in place.
    pub fn assign(&self, x: &mut Array1<f64>, j: usize, xj: ArrayView1<'_, f64>) -> Result<()> {
        check_len(self.n, x.len())?;
        let r = self.range(j)?;
        check_len(r.len(), xj.len())?;
        x.slice_mut(s![r]).assign(&xj);
        Ok(())
    }
}

/// Uniform partition of `n` coordinates into `num_blocks` blocks.
pub fn make_partition(n: usize, num_blocks: usize) -> Result<BlockPartition> {
    BlockPartition::uniform(n, num_blocks)
}

/// Copy of block `j` of `x`.
pub fn extract_block(x: ArrayView1<'_, f64>, p: &BlockPartition, j: usize) -> Result<Array1<f64>> {
    p.extract(x, j).map(|v| v.to_owned())
}

/// Copy of `x` with block `j` replaced by `xj_new`.
pub fn scatter_block(
    x: ArrayView1<'_, f64>,
    p: &BlockPartition,
    j: usize,
    xj_new: ArrayView1<'_, f64>,
) -> Result<Array1<f64>> {
    let mut out = x.to_owned();
    p.assign(&mut out, j, xj_new)?;
    Ok(out)
}
