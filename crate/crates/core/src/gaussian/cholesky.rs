use rand::Rng;
use rand_distr::StandardNormal;

use super::covariance::{covariance_matrix_at, SymMatrix};
use super::path::Path;
use crate::error::{Error, Result};
use crate::params::TimeGrid;

/// Largest grid handled by the dense sampler by default (O(N^3) setup).
pub const CHOLESKY_CAP: usize = 4096;

/// Lower-triangular Cholesky factor, packed row by row.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    packed: Vec<f64>,
}

impl CholeskyFactor {
    pub fn new(m: &SymMatrix) -> Result<Self> {
        let n = m.dim();
        let mut packed = vec![0.0; n * (n + 1) / 2];
        let offset = |i: usize| i * (i + 1) / 2;
        for i in 0..n {
            let oi = offset(i);
            for j in 0..=i {
                let oj = offset(j);
                let dot: f64 = (0..j).map(|k| packed[oi + k] * packed[oj + k]).sum();
                let v = m.get(i, j) - dot;
                if j == i {
                    if !(v > 0.0) {
                        return Err(Error::Factorization { pivot: i, value: v });
                    }
                    packed[oi + i] = v.sqrt();
                } else {
                    packed[oi + j] = v / packed[oj + j];
                }
            }
        }
        Ok(Self { n, packed })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.packed[i * (i + 1) / 2 + j]
        }
    }

    /// `L z`, written into `out`.
    pub fn mul_into(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let row = &self.packed[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            *o = row.iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }
}

/// Exact fBm sampler built on a Cholesky factor of the grid covariance.
#[derive(Debug, Clone)]
pub struct CholeskySampler {
    factor: CholeskyFactor,
}

impl CholeskySampler {
    pub fn new(grid: &TimeGrid, hurst: f64) -> Result<Self> {
        Self::with_cap(grid, hurst, CHOLESKY_CAP)
    }

    pub fn with_cap(grid: &TimeGrid, hurst: f64, cap: usize) -> Result<Self> {
        if grid.n_points() > cap {
            return Err(Error::Domain(format!(
                "{} grid points exceed the Cholesky cap {cap}",
                grid.n_points()
            )));
        }
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::Domain(format!("Hurst index {hurst} not in (0,1)")));
        }
        let m = covariance_matrix_at(&grid.positive_times(), hurst);
        Ok(Self {
            factor: CholeskyFactor::new(&m)?,
        })
    }

    /// One coordinate, including the leading zero at time 0.
    pub fn sample_series<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.factor.dim();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = vec![0.0; n + 1];
        self.factor.mul_into(&z, &mut out[1..]);
        out
    }

    pub fn sample_path<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Path {
        let mut p = Path::zeros(dim, self.factor.dim() + 1);
        for k in 0..dim {
            let s = self.sample_series(rng);
            p.set_coordinate(k, &s);
        }
        p
    }
}

/// `d` independent fBm coordinates on `grid` via Cholesky factorization.
pub fn sample_fbm_cholesky<R: Rng + ?Sized>(
    grid: &TimeGrid,
    hurst: f64,
    dim: usize,
    rng: &mut R,
) -> Result<Path> {
    Ok(CholeskySampler::new(grid, hurst)?.sample_path(dim, rng))
}
