//! Randomized quasi-Monte Carlo over the unit cube.
//!
//! Points come from Owen-scrambled Sobol sequences; each replicate uses an
//! independent scramble seed, and the spread of replicate means gives the
//! standard error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::pairwise_sum;

/// Points available per scrambled sequence.
pub const MAX_POINTS_PER_REPLICATE: u32 = 1 << 16;
pub const MAX_DIMENSION: usize = sobol_burley::NUM_DIMENSIONS as usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QmcBudget {
    pub points_per_replicate: u32,
    pub replicates: usize,
}

impl QmcBudget {
    pub fn new(points_per_replicate: u32, replicates: usize) -> Result<Self> {
        if points_per_replicate == 0 || points_per_replicate > MAX_POINTS_PER_REPLICATE {
            return Err(Error::Domain(format!(
                "points per replicate must be in 1..={MAX_POINTS_PER_REPLICATE}"
            )));
        }
        if replicates < 2 {
            return Err(Error::Domain("at least two QMC replicates are needed".into()));
        }
        Ok(Self {
            points_per_replicate,
            replicates,
        })
    }

    /// Smallest budget with full-length replicates covering `total` points.
    pub fn with_total(total: u64) -> Self {
        let per = MAX_POINTS_PER_REPLICATE;
        let replicates = total.div_ceil(per as u64).max(2) as usize;
        Self {
            points_per_replicate: per,
            replicates,
        }
    }

    pub fn total_points(&self) -> u64 {
        self.points_per_replicate as u64 * self.replicates as u64
    }
}

impl Default for QmcBudget {
    fn default() -> Self {
        Self {
            points_per_replicate: MAX_POINTS_PER_REPLICATE,
            replicates: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QmcEstimate {
    pub value: f64,
    pub std_error: f64,
    pub points: u64,
}

fn replicate_seed(seed: u32, replicate: usize) -> u32 {
    let mut z = (seed as u64) << 32 | replicate as u64;
    z = (z ^ (z >> 33)).wrapping_mul(0xff51_afd7_ed55_8ccd);
    z = (z ^ (z >> 33)).wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    (z ^ (z >> 33)) as u32
}

/// Estimates `int_{[0,1]^dim} f`. Coordinates are strictly inside the cube.
pub fn rqmc<F>(dim: usize, budget: QmcBudget, seed: u32, f: F) -> Result<QmcEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if dim == 0 || dim > MAX_DIMENSION {
        return Err(Error::Domain(format!("QMC dimension {dim} unsupported")));
    }
    let n = budget.points_per_replicate;
    let means: Vec<f64> = (0..budget.replicates)
        .into_par_iter()
        .map(|r| {
            let s = replicate_seed(seed, r);
            let mut x = vec![0.0; dim];
            let mut vals = Vec::with_capacity(n as usize);
            for i in 0..n {
                for (j, xj) in x.iter_mut().enumerate() {
                    // centre of the f32 cell keeps points off the boundary
                    *xj = sobol_burley::sample(i, j as u32, s) as f64 + 0.5f64.powi(25);
                }
                vals.push(f(&x));
            }
            pairwise_sum(&vals) / n as f64
        })
        .collect();
    let r = means.len() as f64;
    let value = pairwise_sum(&means) / r;
    let var = means.iter().map(|m| (m - value).powi(2)).sum::<f64>() / (r - 1.0);
    if !value.is_finite() {
        return Err(Error::Quadrature("QMC estimate is not finite".into()));
    }
    Ok(QmcEstimate {
        value,
        std_error: (var / r).sqrt(),
        points: budget.total_points(),
    })
}
