//! Simulation and quadrature toolkit for occupation functionals of two
//! independent fractional Brownian motions.
//!
//! For two independent `d`-dimensional fBms with Hurst index `H` and a
//! zero-integral test function `f`, the functional
//!
//! ```text
//! F_n(t1, t2) = n^{(2 + Hd)/2} int_0^t1 int_0^t2 f(n^H (B1_u - B2_v)) du dv
//! ```
//!
//! converges in law, for `2/(d+1) < H < 2/d`, to the mixed normal
//! `sqrt(D_{H,d}) ||f||_{2/H-d} sqrt(alpha(t1,t2)) Z`, where `alpha` is the
//! intersection local time. The crate provides the pieces needed to check
//! that statement numerically:
//!
//! * [`gaussian`]: exact fBm samplers and covariance algebra,
//! * [`test_functions`]: the test-function library and `||f||_beta`,
//! * [`constants`]: `D_{H,d}`, moments of `sqrt(alpha) Z`, and the integral
//!   bounds used in the tightness argument,
//! * [`functionals`]: `F_n` and mollified local-time estimators on paths,
//! * [`montecarlo`]: replicated experiments and statistical comparison.

pub mod constants;
pub mod error;
pub mod functionals;
pub mod gaussian;
pub mod montecarlo;
pub mod params;
pub mod qmc;
pub mod quadrature;
pub mod rng;
pub mod test_functions;

pub use error::{Error, Result};
pub use gaussian::{FbmPathPair, FbmSampler, Path, SamplerKind};
pub use params::{ModelParams, TimeGrid};
pub use quadrature::{QuadratureSpec, Substitution};
pub use rng::{Purpose, StreamKey};
pub use test_functions::{make_gaussian_derivative, make_gaussian_difference, TestFunction};
