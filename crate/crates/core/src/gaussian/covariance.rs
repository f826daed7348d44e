use crate::error::{Error, Result};
use crate::params::TimeGrid;

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Hurst index {hurst} not in (0,1)")))
    }
}

/// `E[B_s B_t] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2`.
pub fn fbm_covariance(s: f64, t: f64, hurst: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::Domain(format!("negative time in covariance ({s}, {t})")));
    }
    Ok(cov_unchecked(s, t, hurst))
}

#[inline]
pub(crate) fn cov_unchecked(s: f64, t: f64, hurst: f64) -> f64 {
    let two_h = 2.0 * hurst;
    0.5 * (t.powf(two_h) + s.powf(two_h) - (t - s).abs().powf(two_h))
}

/// Covariance of the increments `B_b - B_a` and `B_q - B_p`.
#[inline]
pub(crate) fn increment_cov(a: f64, b: f64, p: f64, q: f64, hurst: f64) -> f64 {
    let two_h = 2.0 * hurst;
    0.5 * ((b - p).abs().powf(two_h) + (a - q).abs().powf(two_h)
        - (b - q).abs().powf(two_h)
        - (a - p).abs().powf(two_h))
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let two_h = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn from_fn<F: Fn(usize, usize) -> f64>(n: usize, f: F) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Covariance of one fBm coordinate at the positive grid times.
pub fn covariance_matrix(grid: &TimeGrid, hurst: f64) -> Result<SymMatrix> {
    check_hurst(hurst)?;
    let times = grid.positive_times();
    Ok(covariance_matrix_at(&times, hurst))
}

pub(crate) fn covariance_matrix_at(times: &[f64], hurst: f64) -> SymMatrix {
    SymMatrix::from_fn(times.len(), |i, j| cov_unchecked(times[i], times[j], hurst))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_examples() {
        let t: f64 = 1.7;
        assert!((fbm_covariance(t, t, 0.3).unwrap() - t.powf(0.6)).abs() < 1e-15);
        assert!((fbm_covariance(1.0, 2.0, 0.75).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(fbm_covariance(0.0, 3.0, 0.4).unwrap(), 0.0);
        assert!(fbm_covariance(-1.0, 1.0, 0.5).is_err());
        assert!(fbm_covariance(1.0, 1.0, 1.0).is_err());
        assert!(fbm_covariance(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn brownian_grid_matrix() {
        let g = TimeGrid::new(2.0, 2).unwrap();
        let m = covariance_matrix(&g, 0.5).unwrap();
        assert_eq!(m.dim(), 2);
        assert!((m.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((m.get(0, 1) - 1.0).abs() < 1e-15);
        assert!((m.get(1, 1) - 2.0).abs() < 1e-15);
        let single = covariance_matrix(&TimeGrid::new(0.8, 1).unwrap(), 0.7).unwrap();
        assert!((single.get(0, 0) - 0.8f64.powf(1.4)).abs() < 1e-15);
    }

    #[test]
    fn stationary_increments() {
        for &h in &[0.2, 0.5, 0.75, 0.95] {
            for &(s, t) in &[(0.1, 0.9), (2.0, 5.5), (0.3, 0.31)] {
                let var = cov_unchecked(t, t, h) + cov_unchecked(s, s, h) - 2.0 * cov_unchecked(s, t, h);
                let exact = f64::powf(t - s, 2.0 * h);
                assert!((var - exact).abs() <= 1e-12 * exact.max(1e-3), "{h} {s} {t}");
                let inc = increment_cov(s, t, s, t, h);
                assert!((inc - exact).abs() <= 1e-12 * exact.max(1e-3));
            }
        }
    }

    #[test]
    fn fgn_lag_one() {
        assert!((fgn_autocovariance(1, 0.75) - 0.5 * (2f64.powf(1.5) - 2.0)).abs() < 1e-15);
        assert_eq!(fgn_autocovariance(0, 0.3), 1.0);
        assert!(fgn_autocovariance(3, 0.5).abs() < 1e-15);
    }
}
