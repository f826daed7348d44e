//! Model parameters and time discretisation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hurst index, dimension and the two time horizons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub hurst: f64,
    pub dim: usize,
    pub t1: f64,
    pub t2: f64,
}

impl ModelParams {
    pub fn new(hurst: f64, dim: usize, t1: f64, t2: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::Domain(format!("Hurst index {hurst} not in (0,1)")));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if !(t1 > 0.0 && t1.is_finite() && t2 > 0.0 && t2.is_finite()) {
            return Err(Error::Domain(format!(
                "time horizons must be positive and finite, got ({t1}, {t2})"
            )));
        }
        Ok(Self { hurst, dim, t1, t2 })
    }

    /// `H * d`.
    pub fn hd(&self) -> f64 {
        self.hurst * self.dim as f64
    }

    /// `2/(d+1) < H < 2/d`, the hypothesis of the limit theorem.
    pub fn clt_valid(&self) -> bool {
        let d = self.dim as f64;
        2.0 / (d + 1.0) < self.hurst && self.hurst < 2.0 / d
    }

    /// `H d < 2`: the intersection local time exists.
    pub fn lt_valid(&self) -> bool {
        self.hd() < 2.0
    }

    /// Exponent `2/H - d` of the energy norm.
    pub fn beta(&self) -> f64 {
        2.0 / self.hurst - self.dim as f64
    }

    pub fn require_lt(&self) -> Result<()> {
        if self.lt_valid() {
            Ok(())
        } else {
            Err(self.regime("H d < 2"))
        }
    }

    pub fn require_clt(&self) -> Result<()> {
        if self.clt_valid() {
            Ok(())
        } else {
            Err(self.regime("2/(d+1) < H < 2/d"))
        }
    }

    pub(crate) fn regime(&self, requirement: &'static str) -> Error {
        Error::Regime {
            requirement,
            hurst: self.hurst,
            dim: self.dim,
        }
    }

    pub fn with_horizons(&self, t1: f64, t2: f64) -> Result<Self> {
        Self::new(self.hurst, self.dim, t1, t2)
    }
}

/// Uniform grid `0 = tau_0 < tau_1 < ... < tau_n = t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::Domain(format!("grid horizon {t_max} must be positive")));
        }
        if n_points == 0 {
            return Err(Error::Domain("grid needs at least one step".into()));
        }
        Ok(Self { t_max, n_points })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Number of steps; the grid holds `n_points + 1` times.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.n_points as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_points {
            self.t_max
        } else {
            self.t_max * k as f64 / self.n_points as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_points).map(|k| self.time(k)).collect()
    }

    /// The strictly positive grid times `tau_1, ..., tau_n`.
    pub fn positive_times(&self) -> Vec<f64> {
        (1..=self.n_points).map(|k| self.time(k)).collect()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.t_max * c, self.n_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_flags() {
        let p = ModelParams::new(0.75, 2, 1.0, 1.0).unwrap();
        assert!(p.clt_valid());
        assert!(p.lt_valid());
        assert!((p.beta() - 2.0 / 3.0).abs() < 1e-15);

        let p = ModelParams::new(0.55, 3, 1.0, 1.0).unwrap();
        assert!(p.clt_valid());

        // H d = 2.7
        let p = ModelParams::new(0.9, 3, 1.0, 1.0).unwrap();
        assert!(!p.lt_valid());
        assert!(!p.clt_valid());
        assert!(matches!(p.require_lt(), Err(Error::Regime { .. })));

        // Brownian motion in d = 3 sits on the boundary H = 2/(d+1).
        let p = ModelParams::new(0.5, 3, 1.0, 1.0).unwrap();
        assert!(!p.clt_valid());
        assert!(p.lt_valid());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(0.0, 2, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 2, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 1, -1.0, 1.0).is_err());
    }

    #[test]
    fn grid_is_uniform() {
        let g = TimeGrid::new(3.0, 7).unwrap();
        let t = g.times();
        assert_eq!(t.len(), 8);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[7], 3.0);
        for w in t.windows(2) {
            assert!(w[1] > w[0]);
            assert!(((w[1] - w[0]) - g.step()).abs() <= 1e-12 * g.step());
        }
    }
}
