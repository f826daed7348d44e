use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::pairwise_sum;

/// Coefficient of the asymptotic 1% two-sample Kolmogorov-Smirnov critical
/// value, `sqrt(-ln(0.005) / 2)`.
pub const KS_COEFFICIENT_1PCT: f64 = 1.627_6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: u32,
    pub value: f64,
    pub se: f64,
}

/// Raw moment `mean(x^p)` with its jackknife standard error.
pub fn empirical_moment(samples: &[f64], p: u32) -> Result<MomentEstimate> {
    if samples.len() < 2 {
        return Err(Error::Empty("need at least two samples for a moment"));
    }
    let powers: Vec<f64> = samples.iter().map(|x| x.powi(p as i32)).collect();
    let m = powers.len() as f64;
    let total = pairwise_sum(&powers);
    let value = total / m;
    // leave-one-out estimates and their spread
    let loo: Vec<f64> = powers.iter().map(|x| (total - x) / (m - 1.0)).collect();
    let loo_mean = pairwise_sum(&loo) / m;
    let dev: Vec<f64> = loo.iter().map(|t| (t - loo_mean).powi(2)).collect();
    let se = ((m - 1.0) / m * pairwise_sum(&dev)).sqrt();
    Ok(MomentEstimate { p, value, se })
}

/// Mean and its standard error.
pub fn mean_se(samples: &[f64]) -> Result<(f64, f64)> {
    let e = empirical_moment(samples, 1)?;
    Ok((e.value, e.se))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub ks: f64,
    pub critical_1pct: f64,
    /// `ks < critical_1pct`.
    pub decision: bool,
}

pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_COEFFICIENT_1PCT * ((n + m) / (n * m)).sqrt()
}

/// Two-sample Kolmogorov-Smirnov distance `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("Kolmogorov-Smirnov sample"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in Kolmogorov-Smirnov sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        // step past every copy of x in both samples before comparing
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

pub fn two_sample_compare(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let ks = ks_statistic(a, b)?;
    let critical_1pct = ks_critical_1pct(a.len(), b.len());
    Ok(KsResult {
        ks,
        critical_1pct,
        decision: ks < critical_1pct,
    })
}

/// Sample Pearson correlation of matched pairs.
pub fn correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (ma, _) = mean_se(a)?;
    let (mb, _) = mean_se(b)?;
    let cov: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let va: Vec<f64> = a.iter().map(|x| (x - ma).powi(2)).collect();
    let vb: Vec<f64> = b.iter().map(|y| (y - mb).powi(2)).collect();
    Ok(pairwise_sum(&cov) / (pairwise_sum(&va) * pairwise_sum(&vb)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jackknife_of_the_mean_is_the_usual_se() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0];
        let e = empirical_moment(&x, 1).unwrap();
        let m = 4.0;
        let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 4.0;
        assert!((e.value - m).abs() < 1e-15);
        assert!((e.se - (var / 5.0f64).sqrt()).abs() < 1e-12);
        let e2 = empirical_moment(&x, 2).unwrap();
        assert!((e2.value - 22.0).abs() < 1e-12);
    }

    #[test]
    fn ks_edge_cases() {
        let a = [0.3, 0.1, 0.2];
        assert_eq!(ks_statistic(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[0.0; 5], &[1.0; 7]).unwrap(), 1.0);
        assert_eq!(ks_statistic(&[0.0, 1.0], &[0.5]).unwrap(), 0.5);
        assert!(two_sample_compare(&[], &a).is_err());
        let r = two_sample_compare(&a, &a).unwrap();
        assert!(r.decision);
    }

    #[test]
    fn ks_with_ties() {
        // identical multisets in different order
        assert_eq!(ks_statistic(&[1.0, 1.0, 2.0], &[2.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!((ks_statistic(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn critical_value() {
        let c = ks_critical_1pct(10_000, 10_000);
        assert!((c - 1.6276 * (2e-4f64).sqrt()).abs() < 1e-12);
    }
}
