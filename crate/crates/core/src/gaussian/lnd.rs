use rand::Rng;
use serde::{Deserialize, Serialize};

use super::covariance::increment_cov;
use crate::error::{Error, Result};

/// Observed range of the local nondeterminism ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LndReport {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub trials: usize,
}

/// Exact value of
/// `Var(sum x_i (B_{s_i} - B_{s_{i-1}})) / sum x_i^2 (s_i - s_{i-1})^{2H}`
/// with `s_0 = 0`.
pub fn lnd_ratio(times: &[f64], weights: &[f64], hurst: f64) -> f64 {
    let n = times.len();
    let start = |i: usize| if i == 0 { 0.0 } else { times[i - 1] };
    let mut var = 0.0;
    let mut denom = 0.0;
    for i in 0..n {
        let (a, b) = (start(i), times[i]);
        denom += weights[i] * weights[i] * (b - a).powf(2.0 * hurst);
        for j in 0..n {
            let (p, q) = (start(j), times[j]);
            var += weights[i] * weights[j] * increment_cov(a, b, p, q, hurst);
        }
    }
    var / denom
}

/// Samples random configurations `0 < s_1 < ... < s_n <= 1` with weights
/// uniform in `[-1, 1]` and reports the min and max of [`lnd_ratio`].
///
/// Coordinates of a `d`-dimensional fBm are independent, so the ratio for
/// vector weights is a convex combination of scalar ratios and the scalar
/// range bounds it.
pub fn lnd_diagnostic<R: Rng + ?Sized>(
    hurst: f64,
    n_segments: usize,
    n_trials: usize,
    rng: &mut R,
) -> Result<LndReport> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Domain(format!("Hurst index {hurst} not in (0,1)")));
    }
    if !(1..=8).contains(&n_segments) {
        return Err(Error::Domain(format!(
            "n_segments = {n_segments} outside 1..=8"
        )));
    }
    if n_trials == 0 {
        return Err(Error::Domain("n_trials must be at least 1".into()));
    }
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = f64::NEG_INFINITY;
    let mut done = 0;
    while done < n_trials {
        let mut times: Vec<f64> = (0..n_segments).map(|_| 1.0 - rng.gen::<f64>()).collect();
        times.sort_by(f64::total_cmp);
        let weights: Vec<f64> = (0..n_segments).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let degenerate = times[0] < 1e-12
            || times.windows(2).any(|w| w[1] - w[0] < 1e-12)
            || weights.iter().all(|w| w.abs() < 1e-12);
        if degenerate {
            continue;
        }
        let r = lnd_ratio(&times, &weights, hurst);
        ratio_min = ratio_min.min(r);
        ratio_max = ratio_max.max(r);
        done += 1;
    }
    Ok(LndReport {
        ratio_min,
        ratio_max,
        trials: n_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn brownian_ratio_is_one() {
        let r = lnd_diagnostic(0.5, 5, 200, &mut stream(1, Purpose::Lnd, 0, 0)).unwrap();
        assert!((r.ratio_min - 1.0).abs() < 1e-12);
        assert!((r.ratio_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_segment_ratio_is_one() {
        let r = lnd_diagnostic(0.8, 1, 100, &mut stream(2, Purpose::Lnd, 0, 0)).unwrap();
        assert!((r.ratio_min - 1.0).abs() < 1e-12);
        assert!((r.ratio_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut s = stream(3, Purpose::Lnd, 0, 0);
        assert!(lnd_diagnostic(0.7, 9, 10, &mut s).is_err());
        assert!(lnd_diagnostic(0.7, 0, 10, &mut s).is_err());
        assert!(lnd_diagnostic(0.7, 3, 0, &mut s).is_err());
        assert!(lnd_diagnostic(1.2, 3, 10, &mut s).is_err());
    }
}
