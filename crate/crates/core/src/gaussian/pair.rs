use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cholesky::{CholeskySampler, CHOLESKY_CAP};
use super::circulant::CirculantSampler;
use super::path::Path;
use crate::error::{Error, Result};
use crate::params::{ModelParams, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Cholesky up to [`CHOLESKY_CAP`] grid points, circulant embedding above.
    #[default]
    Auto,
    Cholesky,
    Circulant,
}

/// A prepared exact sampler for one grid and Hurst index.
#[derive(Debug)]
pub enum FbmSampler {
    Cholesky(CholeskySampler),
    Circulant(CirculantSampler),
}

impl FbmSampler {
    pub fn new(grid: &TimeGrid, hurst: f64, kind: SamplerKind) -> Result<Self> {
        match kind {
            SamplerKind::Cholesky => Ok(Self::Cholesky(CholeskySampler::new(grid, hurst)?)),
            SamplerKind::Circulant => Ok(Self::Circulant(CirculantSampler::new(grid, hurst)?)),
            SamplerKind::Auto if grid.n_points() <= CHOLESKY_CAP => {
                Ok(Self::Cholesky(CholeskySampler::new(grid, hurst)?))
            }
            SamplerKind::Auto => Ok(Self::Circulant(CirculantSampler::new(grid, hurst)?)),
        }
    }

    pub fn sample_path<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Path {
        match self {
            Self::Cholesky(s) => s.sample_path(dim, rng),
            Self::Circulant(s) => s.sample_path(dim, rng),
        }
    }
}

/// Two independent `d`-dimensional fBm paths `B^{H,1}` on `grid1` and
/// `B^{H,2}` on `grid2`.
#[derive(Debug, Clone)]
pub struct FbmPathPair {
    pub params: ModelParams,
    pub grid1: TimeGrid,
    pub grid2: TimeGrid,
    pub path1: Path,
    pub path2: Path,
}

impl FbmPathPair {
    pub fn new(
        params: ModelParams,
        grid1: TimeGrid,
        grid2: TimeGrid,
        path1: Path,
        path2: Path,
    ) -> Result<Self> {
        for (grid, path) in [(&grid1, &path1), (&grid2, &path2)] {
            if path.dim() != params.dim {
                return Err(Error::DimensionMismatch {
                    expected: params.dim,
                    found: path.dim(),
                });
            }
            if path.len() != grid.n_points() + 1 {
                return Err(Error::DimensionMismatch {
                    expected: grid.n_points() + 1,
                    found: path.len(),
                });
            }
        }
        Ok(Self {
            params,
            grid1,
            grid2,
            path1,
            path2,
        })
    }

    /// Draws both paths; `rng1` and `rng2` must be distinct streams.
    pub fn sample<R: Rng + ?Sized>(
        params: ModelParams,
        sampler1: (&TimeGrid, &FbmSampler),
        sampler2: (&TimeGrid, &FbmSampler),
        rng1: &mut R,
        rng2: &mut R,
    ) -> Result<Self> {
        let path1 = sampler1.1.sample_path(params.dim, rng1);
        let path2 = sampler2.1.sample_path(params.dim, rng2);
        Self::new(params, sampler1.0.clone(), sampler2.0.clone(), path1, path2)
    }

    /// `B^{H,1}_{tau_i} - B^{H,2}_{tau_j}`.
    pub fn field_increment(&self, i: usize, j: usize) -> Result<Vec<f64>> {
        if i >= self.path1.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.path1.len(),
            });
        }
        if j >= self.path2.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.path2.len(),
            });
        }
        Ok(self
            .path1
            .point(i)
            .iter()
            .zip(self.path2.point(j))
            .map(|(a, b)| a - b)
            .collect())
    }
}
