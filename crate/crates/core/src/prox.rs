//! Block-separable regularizers and their proximal maps.
//!
//! Every penalty acts on one block at a time. For a block penalty `g_j` and
//! step parameter `eta > 0` the proximal map is
//! `argmin_u g_j(u) + (eta / 2) * ||u - z||^2`.

use ndarray::{Array1, ArrayView1, Zip};

use crate::blocks::BlockPartition;
use crate::error::{check_len, Error, Result};

/// Penalty applied to a single block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Zero,
    /// `lambda * ||u||_1`
    L1(f64),
    /// `lambda * ||u||_2`
    GroupL2(f64),
    /// `group * ||u||_2 + l1 * ||u||_1`
    SparseGroup { group: f64, l1: f64 },
    /// `(lambda / 2) * ||u||_2^2`
    Ridge(f64),
    /// `l1 * ||u||_1 + (ridge / 2) * ||u||_2^2`
    ElasticNet { l1: f64, ridge: f64 },
}

impl Penalty {
    fn weights(&self) -> [f64; 2] {
        match *self {
            Penalty::Zero => [0.0, 0.0],
            Penalty::L1(l) | Penalty::GroupL2(l) | Penalty::Ridge(l) => [l, 0.0],
            Penalty::SparseGroup { group, l1 } => [group, l1],
            Penalty::ElasticNet { l1, ridge } => [l1, ridge],
        }
    }

    fn validate(&self) -> Result<()> {
        for w in self.weights() {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Config(format!("penalty weight {w} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Curvature contributed by the penalty (its strong-convexity modulus).
    pub fn strong_convexity(&self) -> f64 {
        match *self {
            Penalty::Ridge(l) => l,
            Penalty::ElasticNet { ridge, .. } => ridge,
            _ => 0.0,
        }
    }

    /// True when the penalty is differentiable everywhere.
    pub fn is_smooth(&self) -> bool {
        match *self {
            Penalty::Zero | Penalty::Ridge(_) => true,
            Penalty::L1(l) | Penalty::GroupL2(l) => l == 0.0,
            Penalty::SparseGroup { group, l1 } => group == 0.0 && l1 == 0.0,
            Penalty::ElasticNet { l1, .. } => l1 == 0.0,
        }
    }

    pub fn value(&self, u: ArrayView1<'_, f64>) -> f64 {
        match *self {
            Penalty::Zero => 0.0,
            Penalty::L1(l) => l * l1_norm(u),
            Penalty::GroupL2(l) => l * l2_norm(u),
            Penalty::SparseGroup { group, l1 } => group * l2_norm(u) + l1 * l1_norm(u),
            Penalty::Ridge(l) => 0.5 * l * u.dot(&u),
            Penalty::ElasticNet { l1, ridge } => l1 * l1_norm(u) + 0.5 * ridge * u.dot(&u),
        }
    }

    /// Proximal map at step parameter `eta`.
    pub fn prox(&self, z: ArrayView1<'_, f64>, eta: f64) -> Result<Array1<f64>> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidStep(eta));
        }
        Ok(match *self {
            Penalty::Zero => z.to_owned(),
            Penalty::L1(l) => soft_threshold(z, l / eta),
            Penalty::GroupL2(l) => group_shrink(z.to_owned(), l / eta),
            Penalty::SparseGroup { group, l1 } => group_shrink(soft_threshold(z, l1 / eta), group / eta),
            Penalty::Ridge(l) => z.mapv(|v| v * eta / (eta + l)),
            Penalty::ElasticNet { l1, ridge } => {
                let mut u = soft_threshold(z, l1 / eta);
                u.mapv_inplace(|v| v * eta / (eta + ridge));
                u
            }
        })
    }

    /// Gradient of a smooth penalty; `None` for non-smooth ones.
    pub fn gradient(&self, u: ArrayView1<'_, f64>) -> Option<Array1<f64>> {
        if !self.is_smooth() {
            return None;
        }
        Some(u.mapv(|v| v * self.strong_convexity()))
    }

    /// Distance from `-eta * (u - z)` to the subdifferential of the penalty
    /// at `u`, i.e. `min_{s in dg(u)} ||s + eta * (u - z)||`. Zero exactly
    /// when `u` is the proximal point of `z`.
    pub fn optimality_residual(
        &self,
        u: ArrayView1<'_, f64>,
        z: ArrayView1<'_, f64>,
        eta: f64,
    ) -> f64 {
        let w: Array1<f64> = Zip::from(&u).and(&z).map_collect(|&a, &b| eta * (a - b));
        match *self {
            Penalty::Zero => l2_norm(w.view()),
            Penalty::Ridge(l) => l2_norm((&w + &u.mapv(|v| l * v)).view()),
            Penalty::L1(l) => l1_residual(u, w.view(), l),
            Penalty::ElasticNet { l1, ridge } => {
                let w = &w + &u.mapv(|v| ridge * v);
                l1_residual(u, w.view(), l1)
            }
            Penalty::GroupL2(l) => {
                let nu = l2_norm(u);
                if nu > 0.0 {
                    l2_norm((&w + &u.mapv(|v| l * v / nu)).view())
                } else {
                    (l2_norm(w.view()) - l).max(0.0)
                }
            }
            Penalty::SparseGroup { group, l1 } => {
                let nu = l2_norm(u);
                if nu > 0.0 {
                    let w = &w + &u.mapv(|v| group * v / nu);
                    l1_residual(u, w.view(), l1)
                } else {
                    // s = a + b with ||a|| <= group and |b_k| <= l1
                    let r = soft_threshold(w.view(), l1);
                    (l2_norm(r.view()) - group).max(0.0)
                }
            }
        }
    }
}

fn l1_residual(u: ArrayView1<'_, f64>, w: ArrayView1<'_, f64>, l: f64) -> f64 {
    Zip::from(&u)
        .and(&w)
        .fold(0.0, |acc, &ui, &wi| {
            let r = if ui != 0.0 {
                wi + l * ui.signum()
            } else {
                (wi.abs() - l).max(0.0)
            };
            acc + r * r
        })
        .sqrt()
}

pub(crate) fn l1_norm(u: ArrayView1<'_, f64>) -> f64 {
    u.iter().map(|v| v.abs()).sum()
}

pub(crate) fn l2_norm(u: ArrayView1<'_, f64>) -> f64 {
    u.dot(&u).sqrt()
}

/// Componentwise soft-thresholding; `|z_k| <= tau` maps to exactly zero.
pub fn soft_threshold(z: ArrayView1<'_, f64>, tau: f64) -> Array1<f64> {
    z.mapv(|v| {
        if v > tau {
            v - tau
        } else if v < -tau {
            v + tau
        } else {
            0.0
        }
    })
}

/// Block shrinkage `max(0, 1 - tau / ||z||) * z`.
pub fn group_shrink(mut z: Array1<f64>, tau: f64) -> Array1<f64> {
    let norm = l2_norm(z.view());
    if norm <= tau {
        z.fill(0.0);
    } else {
        let scale = 1.0 - tau / norm;
        z.mapv_inplace(|v| v * scale);
    }
    z
}

/// One penalty per block.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerSpec {
    per_block: Vec<Penalty>,
}

impl RegularizerSpec {
    pub fn new(per_block: Vec<Penalty>) -> Result<Self> {
        if per_block.is_empty() {
            return Err(Error::Config("regularizer needs one entry per block".into()));
        }
        for p in &per_block {
            p.validate()?;
        }
        Ok(Self { per_block })
    }

    /// Same penalty on each of `num_blocks` blocks.
    pub fn uniform(penalty: Penalty, num_blocks: usize) -> Result<Self> {
        Self::new(vec![penalty; num_blocks])
    }

    pub fn zero(num_blocks: usize) -> Self {
        Self {
            per_block: vec![Penalty::Zero; num_blocks.max(1)],
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.per_block.len()
    }

    pub fn penalties(&self) -> &[Penalty] {
        &self.per_block
    }

    pub fn penalty(&self, j: usize) -> Result<&Penalty> {
        self.per_block.get(j).ok_or(Error::Index {
            what: "block",
            index: j,
            limit: self.per_block.len(),
        })
    }

    pub fn is_smooth(&self) -> bool {
        self.per_block.iter().all(Penalty::is_smooth)
    }

    /// Smallest per-block strong-convexity modulus.
    pub fn strong_convexity(&self) -> f64 {
        self.per_block
            .iter()
            .map(Penalty::strong_convexity)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `g(x) = sum_j g_j(x_j)`.
pub fn reg_value(reg: &RegularizerSpec, p: &BlockPartition, x: ArrayView1<'_, f64>) -> Result<f64> {
    check_len(p.num_blocks(), reg.num_blocks())?;
    check_len(p.dim(), x.len())?;
    Ok(p.ranges()
        .zip(reg.penalties())
        .map(|(r, pen)| pen.value(x.slice(ndarray::s![r])))
        .sum())
}

/// Proximal map of `g_j` at step parameter `eta`.
pub fn prox_block(
    reg: &RegularizerSpec,
    j: usize,
    z: ArrayView1<'_, f64>,
    eta: f64,
) -> Result<Array1<f64>> {
    reg.penalty(j)?.prox(z, eta)
}

/// Blockwise proximal map of the whole vector.
pub fn prox_full(
    reg: &RegularizerSpec,
    p: &BlockPartition,
    z: ArrayView1<'_, f64>,
    eta: f64,
) -> Result<Array1<f64>> {
    check_len(p.num_blocks(), reg.num_blocks())?;
    check_len(p.dim(), z.len())?;
    let mut out = Array1::zeros(z.len());
    for (j, r) in p.ranges().enumerate() {
        let u = reg.per_block[j].prox(z.slice(ndarray::s![r.clone()]), eta)?;
        out.slice_mut(ndarray::s![r]).assign(&u);
    }
    Ok(out)
}
