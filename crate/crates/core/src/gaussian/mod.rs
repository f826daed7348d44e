//! Exact Gaussian machinery for fractional Brownian motion: covariance,
//! dense and FFT samplers, the two-path field `X(t1, t2)`, and the local
//! nondeterminism diagnostic.

mod cholesky;
mod circulant;
mod covariance;
mod lnd;
mod pair;
mod path;

pub use cholesky::{sample_fbm_cholesky, CholeskyFactor, CholeskySampler, CHOLESKY_CAP};
pub use circulant::{sample_fbm_circulant, CirculantSampler, EIGEN_TOLERANCE, MAX_DOUBLINGS};
pub use covariance::{covariance_matrix, fbm_covariance, fgn_autocovariance, SymMatrix};
pub use lnd::{lnd_diagnostic, lnd_ratio, LndReport};
pub use pair::{FbmPathPair, FbmSampler, SamplerKind};
pub use path::Path;

pub(crate) use covariance::cov_unchecked;
