//! Distributional checks of the exact samplers against covariance algebra.

use fbm_ilt::gaussian::{
    covariance_matrix, fbm_covariance, fgn_autocovariance, lnd_diagnostic, lnd_ratio,
    CholeskySampler, CirculantSampler,
};
use fbm_ilt::montecarlo::{mean_se, two_sample_compare};
use fbm_ilt::rng::{stream, Purpose};
use fbm_ilt::{FbmPathPair, ModelParams, TimeGrid};
use proptest::prelude::*;

const DRAWS: usize = 100_000;

/// Mean, variance and the standard error of the variance.
fn variance_se(x: &[f64]) -> (f64, f64, f64) {
    let (m, se_mean) = mean_se(x).unwrap();
    let dev2: Vec<f64> = x.iter().map(|v| (v - m).powi(2)).collect();
    let (var, se_var) = mean_se(&dev2).unwrap();
    (m / se_mean, var, se_var)
}

#[test]
fn cholesky_endpoint_is_standard_normal() {
    let grid = TimeGrid::new(1.0, 8).unwrap();
    let s = CholeskySampler::new(&grid, 0.75).unwrap();
    let mut rng = stream(1, Purpose::Test, 0, 0);
    let b1: Vec<f64> = (0..DRAWS).map(|_| *s.sample_series(&mut rng).last().unwrap()).collect();
    let (z_mean, var, se) = variance_se(&b1);
    assert!(z_mean.abs() < 4.0, "mean z = {z_mean}");
    assert!((var - 1.0).abs() < 4.0 * se, "{var} +- {se}");
}

#[test]
fn circulant_increments_have_fgn_covariance() {
    for hurst in [0.75, 0.5] {
        // unit step so increments are fractional Gaussian noise
        let grid = TimeGrid::new(16.0, 16).unwrap();
        let s = CirculantSampler::new(&grid, hurst).unwrap();
        let mut rng = stream(2, Purpose::Test, 0, 0);
        let products: Vec<f64> = (0..DRAWS)
            .map(|_| {
                let p = s.sample_path(1, &mut rng);
                let x = p.coordinate(0);
                (x[1] - x[0]) * (x[2] - x[1])
            })
            .collect();
        let (m, se) = mean_se(&products).unwrap();
        let exact = fgn_autocovariance(1, hurst);
        assert!((m - exact).abs() < 4.0 * se, "H={hurst}: {m} +- {se} vs {exact}");
    }
    assert!((fgn_autocovariance(1, 0.75) - 0.414_213_562_373_095).abs() < 1e-12);
}

#[test]
fn samplers_agree_in_law() {
    let hurst = 0.75;
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let chol = CholeskySampler::new(&grid, hurst).unwrap();
    let circ = CirculantSampler::new(&grid, hurst).unwrap();
    let mut r1 = stream(3, Purpose::Test, 1, 0);
    let mut r2 = stream(3, Purpose::Test, 2, 0);
    let a: Vec<f64> = (0..DRAWS).map(|_| chol.sample_path(1, &mut r1).get(0, 32)).collect();
    let b: Vec<f64> = (0..DRAWS).map(|_| circ.sample_path(1, &mut r2).get(0, 32)).collect();
    for x in [&a, &b] {
        let (z_mean, var, se) = variance_se(x);
        assert!(z_mean.abs() < 4.0);
        assert!((var - 1.0).abs() < 4.0 * se, "{var} +- {se}");
    }
    let ks = two_sample_compare(&a[..10_000], &b[..10_000]).unwrap();
    assert!(ks.decision, "KS {} vs {}", ks.ks, ks.critical_1pct);
}

#[test]
fn field_variance_is_sum_of_powers() {
    let p = ModelParams::new(0.75, 2, 1.0, 0.5).unwrap();
    let g1 = TimeGrid::new(1.0, 4).unwrap();
    let g2 = TimeGrid::new(0.5, 4).unwrap();
    let s1 = CholeskySampler::new(&g1, p.hurst).unwrap();
    let s2 = CholeskySampler::new(&g2, p.hurst).unwrap();
    let mut r1 = stream(4, Purpose::Test, 1, 0);
    let mut r2 = stream(4, Purpose::Test, 2, 0);
    let (i, j) = (3, 2);
    let (u, v) = (g1.time(i), g2.time(j));
    let mut first = Vec::with_capacity(DRAWS);
    let mut second = Vec::with_capacity(DRAWS);
    for _ in 0..DRAWS {
        let pair = FbmPathPair::new(p, g1.clone(), g2.clone(), s1.sample_path(2, &mut r1), s2.sample_path(2, &mut r2))
            .unwrap();
        let x = pair.field_increment(i, j).unwrap();
        first.push(x[0]);
        second.push(x[1]);
    }
    let exact = u.powf(1.5) + v.powf(1.5);
    for x in [&first, &second] {
        let (_, var, se) = variance_se(x);
        assert!((var - exact).abs() < 4.0 * se, "{var} +- {se} vs {exact}");
    }
}

#[test]
fn lnd_interval_for_four_segments() {
    let mut rng = stream(5, Purpose::Lnd, 0, 0);
    let r = lnd_diagnostic(0.75, 4, 10_000, &mut rng).unwrap();
    assert!(r.ratio_min > 0.0 && r.ratio_min <= r.ratio_max && r.ratio_max.is_finite());
    // for H > 1/2 positively correlated increments can push the ratio up
    // to at most the number of segments
    assert!(r.ratio_max <= 4.0);
}

proptest! {
    #[test]
    fn covariance_is_symmetric(s in 0.0f64..10.0, t in 0.0f64..10.0, h in 0.05f64..0.95) {
        prop_assert_eq!(fbm_covariance(s, t, h).unwrap(), fbm_covariance(t, s, h).unwrap());
    }

    #[test]
    fn increments_are_stationary(s in 0.0f64..5.0, gap in 1e-3f64..5.0, h in 0.05f64..0.95) {
        let t = s + gap;
        let var = fbm_covariance(t, t, h).unwrap() + fbm_covariance(s, s, h).unwrap()
            - 2.0 * fbm_covariance(s, t, h).unwrap();
        let exact = gap.powf(2.0 * h);
        prop_assert!((var - exact).abs() <= 1e-12 * exact.max(t.powf(2.0 * h)), "{} vs {}", var, exact);
    }

    #[test]
    fn covariance_matrix_is_self_similar(c in 0.1f64..10.0, h in 0.05f64..0.95, n in 1usize..12) {
        let g = TimeGrid::new(1.0, n).unwrap();
        let a = covariance_matrix(&g, h).unwrap();
        let b = covariance_matrix(&g.scaled(c).unwrap(), h).unwrap();
        let f = c.powf(2.0 * h);
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (f * a.get(i, j), b.get(i, j));
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()));
            }
        }
    }

    #[test]
    fn brownian_lnd_ratio_is_one(
        raw in prop::collection::vec((1e-3f64..1.0, -1.0f64..1.0), 1..8),
    ) {
        let mut times: Vec<f64> = raw.iter().map(|p| p.0).collect();
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let weights: Vec<f64> = raw.iter().take(times.len()).map(|p| p.1 + 2.0).collect();
        let r = lnd_ratio(&times, &weights, 0.5);
        prop_assert!((r - 1.0).abs() < 1e-10, "{}", r);
    }
}
