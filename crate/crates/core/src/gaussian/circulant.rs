use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::covariance::fgn_autocovariance;
use super::path::Path;
use crate::error::{Error, Result};
use crate::params::TimeGrid;

/// Relative tolerance for negative circulant eigenvalues.
pub const EIGEN_TOLERANCE: f64 = 1e-9;
/// Embedding doublings attempted before giving up.
pub const MAX_DOUBLINGS: usize = 3;

/// FFT circulant-embedding sampler for fBm on a uniform grid.
///
/// Fractional Gaussian noise is drawn exactly by embedding its Toeplitz
/// covariance in a circulant matrix of power-of-two size `2m >= 2N`; the
/// increments are then cumulatively summed. One FFT yields two independent
/// series (real and imaginary parts).
pub struct CirculantSampler {
    n_steps: usize,
    scale: f64,
    sqrt_eigen: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("n_steps", &self.n_steps)
            .field("embedding", &self.sqrt_eigen.len())
            .finish()
    }
}

impl CirculantSampler {
    pub fn new(grid: &TimeGrid, hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::Domain(format!("Hurst index {hurst} not in (0,1)")));
        }
        let n = grid.n_points();
        let mut half = n.next_power_of_two();
        let mut planner = FftPlanner::new();
        let mut last = None;
        for _ in 0..=MAX_DOUBLINGS {
            let size = 2 * half;
            let fft = planner.plan_fft_forward(size);
            let mut row: Vec<Complex<f64>> = (0..size)
                .map(|k| {
                    let lag = if k <= half { k } else { size - k };
                    Complex::new(fgn_autocovariance(lag, hurst), 0.0)
                })
                .collect();
            fft.process(&mut row);
            let max = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
            let min = row.iter().map(|c| c.re).fold(f64::MAX, f64::min);
            if min >= -EIGEN_TOLERANCE * max {
                let sqrt_eigen = row
                    .iter()
                    .map(|c| (c.re.max(0.0) / size as f64).sqrt())
                    .collect();
                return Ok(Self {
                    n_steps: n,
                    scale: grid.step().powf(hurst),
                    sqrt_eigen,
                    fft,
                });
            }
            last = Some(Error::Embedding {
                size,
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
            half *= 2;
        }
        Err(last.expect("at least one attempt"))
    }

    pub fn embedding_size(&self) -> usize {
        self.sqrt_eigen.len()
    }

    /// Two independent fGn series of `N` increments each.
    pub fn sample_increments<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let mut w: Vec<Complex<f64>> = self
            .sqrt_eigen
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut w);
        let a = w[..self.n_steps].iter().map(|c| c.re * self.scale).collect();
        let b = w[..self.n_steps].iter().map(|c| c.im * self.scale).collect();
        (a, b)
    }

    pub fn sample_path<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Path {
        let mut p = Path::zeros(dim, self.n_steps + 1);
        let mut k = 0;
        while k < dim {
            let (a, b) = self.sample_increments(rng);
            p.set_coordinate(k, &cumulative(&a));
            if k + 1 < dim {
                p.set_coordinate(k + 1, &cumulative(&b));
            }
            k += 2;
        }
        p
    }
}

fn cumulative(increments: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for x in increments {
        acc += x;
        out.push(acc);
    }
    out
}

/// `d` independent fBm coordinates on a uniform grid via circulant embedding.
pub fn sample_fbm_circulant<R: Rng + ?Sized>(
    grid: &TimeGrid,
    hurst: f64,
    dim: usize,
    rng: &mut R,
) -> Result<Path> {
    Ok(CirculantSampler::new(grid, hurst)?.sample_path(dim, rng))
}
