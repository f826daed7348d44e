//! Numerical integration kernels.
//!
//! Two rules cover everything in the crate: an adaptive Gauss–Kronrod
//! (7/15) integrator for integrands with kinks or moderate peaks, and a
//! level-refined tanh-sinh rule for integrands with algebraic endpoint
//! singularities. Multi-dimensional integrals are built by nesting.

mod gauss_kronrod;
mod sum;
mod tanh_sinh;

pub use gauss_kronrod::{integrate, integrate_semi_infinite, Estimate};
pub use sum::{pairwise_sum, pairwise_sum_by};
pub use tanh_sinh::{refine_levels, LevelEstimate, Refinement, TanhSinhRule};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Change of variables applied before integrating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Substitution {
    None,
    /// `u = a^{1/(2H)}`, followed by the split `a = R c`, `b = R (1 - c)`.
    Power2H,
    /// Polar coordinates in the original `(u, v)` plane.
    RadialPolar,
}

/// Tolerances and refinement budget for a quadrature.
///
/// For the tanh-sinh routes `max_subdivisions` bounds the number of level
/// refinements; for adaptive Gauss–Kronrod it bounds the number of
/// subintervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub substitution: Substitution,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_subdivisions: 10,
            substitution: Substitution::Power2H,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_substitution(mut self, substitution: Substitution) -> Self {
        self.substitution = substitution;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}
