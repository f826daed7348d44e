//! Shared fixtures for the kernel benchmarks.

use fbm_ilt::ModelParams;

/// `d = 2`, `H = 3/4` on the unit square, the reference configuration.
pub fn reference_params() -> ModelParams {
    ModelParams::new(0.75, 2, 1.0, 1.0).expect("valid parameters")
}
