//! Occupation functionals of the field `X(u, v) = B1_u - B2_v` evaluated on
//! sampled path pairs.
//!
//! All double integrals use the midpoint rule: a path sampled on a grid of
//! `2K` steps is read at its odd indices, which are the midpoints of `K`
//! cells of width `2 * step`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{FbmPathPair, FbmSampler, Path, SamplerKind};
use crate::params::{ModelParams, TimeGrid};
use crate::quadrature::pairwise_sum;
use crate::rng::StreamKey;
use crate::test_functions::{GaussianDensity, RadialProfile, TestFunction};

/// Smallest admissible resolution factor.
pub const MIN_KAPPA: f64 = 4.0;
pub const DEFAULT_KAPPA: f64 = 4.0;

/// Relative slack when comparing a cell width with its bound.
const RESOLUTION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample {
    pub value: f64,
    pub n: u64,
    /// Cell width of the midpoint rule on the first path.
    pub grid_step: f64,
    pub f_id: String,
    pub seed_info: Option<[StreamKey; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeEstimate {
    pub value: f64,
    pub epsilon: f64,
    pub grid_step: f64,
}

/// Number of midpoint cells on `[0, t]` with width at most `1/(kappa n)`.
pub fn functional_cells(t: f64, n: u64, kappa: f64) -> usize {
    cells_for_width(t, 1.0 / (kappa * n as f64))
}

/// Number of midpoint cells on `[0, t]` with width at most `eps^{1/H} / 4`.
pub fn local_time_cells(t: f64, epsilon: f64, hurst: f64) -> usize {
    cells_for_width(t, epsilon.powf(1.0 / hurst) / 4.0)
}

fn cells_for_width(t: f64, width: f64) -> usize {
    ((t / width) * (1.0 - RESOLUTION_SLACK)).ceil().max(1.0) as usize
}

/// Sampling grid whose odd points are the midpoints of `cells` cells.
pub fn midpoint_grid(t: f64, cells: usize) -> Result<TimeGrid> {
    TimeGrid::new(t, 2 * cells)
}

/// Prepared samplers for repeated draws of path pairs on fixed grids.
#[derive(Debug)]
pub struct PairPlan {
    params: ModelParams,
    grid1: TimeGrid,
    grid2: TimeGrid,
    sampler1: FbmSampler,
    /// `None` when both grids coincide.
    sampler2: Option<FbmSampler>,
}

impl PairPlan {
    /// Paths on `[0, t1] x [0, t2]` with the given cell counts. `params`
    /// horizons are replaced by `(t1, t2)`.
    pub fn with_cells(
        params: &ModelParams,
        t1: f64,
        t2: f64,
        cells1: usize,
        cells2: usize,
        kind: SamplerKind,
    ) -> Result<Self> {
        let params = params.with_horizons(t1, t2)?;
        let grid1 = midpoint_grid(t1, cells1)?;
        let grid2 = midpoint_grid(t2, cells2)?;
        let sampler1 = FbmSampler::new(&grid1, params.hurst, kind)?;
        let sampler2 = if grid1 == grid2 {
            None
        } else {
            Some(FbmSampler::new(&grid2, params.hurst, kind)?)
        };
        Ok(Self {
            params,
            grid1,
            grid2,
            sampler1,
            sampler2,
        })
    }

    /// Grids for [`evaluate_f`] at scale `n`.
    pub fn for_functional(params: &ModelParams, n: u64, kappa: f64, kind: SamplerKind) -> Result<Self> {
        check_kappa(kappa)?;
        let c1 = functional_cells(params.t1, n, kappa);
        let c2 = functional_cells(params.t2, n, kappa);
        Self::with_cells(params, params.t1, params.t2, c1, c2, kind)
    }

    /// Grids on `[0, n t1] x [0, n t2]` for [`evaluate_f_unscaled`], with the
    /// same cell counts as [`PairPlan::for_functional`].
    pub fn for_unscaled(params: &ModelParams, n: u64, kappa: f64, kind: SamplerKind) -> Result<Self> {
        check_kappa(kappa)?;
        let c1 = functional_cells(params.t1, n, kappa);
        let c2 = functional_cells(params.t2, n, kappa);
        let s = n as f64;
        Self::with_cells(params, s * params.t1, s * params.t2, c1, c2, kind)
    }

    /// Grids for [`estimate_local_time`] at bandwidth `epsilon`.
    pub fn for_local_time(params: &ModelParams, epsilon: f64, kind: SamplerKind) -> Result<Self> {
        check_epsilon(epsilon)?;
        let c1 = local_time_cells(params.t1, epsilon, params.hurst);
        let c2 = local_time_cells(params.t2, epsilon, params.hurst);
        Self::with_cells(params, params.t1, params.t2, c1, c2, kind)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn cells(&self) -> (usize, usize) {
        (self.grid1.n_points() / 2, self.grid2.n_points() / 2)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng1: &mut R, rng2: &mut R) -> Result<FbmPathPair> {
        let s2 = self.sampler2.as_ref().unwrap_or(&self.sampler1);
        FbmPathPair::sample(self.params, (&self.grid1, &self.sampler1), (&self.grid2, s2), rng1, rng2)
    }

    /// Draws a pair from the streams of two keys.
    pub fn sample_keyed(&self, key1: StreamKey, key2: StreamKey) -> Result<FbmPathPair> {
        self.sample(&mut key1.stream(), &mut key2.stream())
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= MIN_KAPPA && kappa.is_finite()) {
        return Err(Error::Domain(format!(
            "resolution factor kappa = {kappa} must be at least {MIN_KAPPA}"
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("bandwidth {epsilon} must be positive")));
    }
    Ok(())
}

/// Midpoint cell width of a grid, which must have an even number of steps.
fn cell_width(grid: &TimeGrid) -> Result<f64> {
    if grid.n_points() % 2 != 0 {
        return Err(Error::Domain(format!(
            "midpoint rule needs an even number of grid steps, got {}",
            grid.n_points()
        )));
    }
    Ok(2.0 * grid.step())
}

/// Points at the odd grid indices, multiplied by `scale`, point-major.
fn midpoints(path: &Path, scale: f64) -> Vec<f64> {
    let d = path.dim();
    let mut out = Vec::with_capacity(path.len() / 2 * d);
    for i in (1..path.len()).step_by(2) {
        out.extend(path.point(i).iter().map(|x| x * scale));
    }
    out
}

/// `sum_i sum_j g(|x_i - y_j|^2)` over the midpoint sets, rows in parallel
/// and combined by pairwise summation.
fn double_sum<G>(xs: &[f64], ys: &[f64], dim: usize, g: G) -> f64
where
    G: Fn(f64) -> f64 + Sync,
{
    let rows: Vec<f64> = xs
        .par_chunks(dim)
        .map(|x| {
            let mut acc = 0.0;
            for y in ys.chunks_exact(dim) {
                let mut r2 = 0.0;
                for k in 0..dim {
                    let z = x[k] - y[k];
                    r2 += z * z;
                }
                acc += g(r2);
            }
            acc
        })
        .collect();
    pairwise_sum(&rows)
}

fn check_dims(pair: &FbmPathPair, dim: usize) -> Result<()> {
    if dim != pair.params.dim {
        return Err(Error::DimensionMismatch {
            expected: pair.params.dim,
            found: dim,
        });
    }
    Ok(())
}

fn check_beta(f: &TestFunction, params: &ModelParams) -> Result<()> {
    if let Some(b) = f.beta {
        let want = params.beta();
        if (b - want).abs() > 1e-12 * want.abs().max(1.0) {
            return Err(Error::NotInSpace(format!(
                "test function is attached to beta = {b}, the model needs {want}"
            )));
        }
    }
    Ok(())
}

fn check_resolution(cell: f64, required: f64, kappa: f64, n: u64) -> Result<()> {
    if cell > required * (1.0 + RESOLUTION_SLACK) {
        return Err(Error::Resolution {
            cell,
            required,
            kappa,
            n,
        });
    }
    Ok(())
}

/// `F_n = n^{(2+Hd)/2} int int f(n^H X(u, v)) du dv` by the midpoint rule,
/// on paths over `[0, t1] x [0, t2]`. Cells must be no wider than
/// `1/(kappa n)`.
pub fn evaluate_f(pair: &FbmPathPair, f: &TestFunction, n: u64, kappa: f64) -> Result<FunctionalSample> {
    check_kappa(kappa)?;
    check_dims(pair, f.dim)?;
    check_beta(f, &pair.params)?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let d1 = cell_width(&pair.grid1)?;
    let d2 = cell_width(&pair.grid2)?;
    let required = 1.0 / (kappa * n as f64);
    check_resolution(d1, required, kappa, n)?;
    check_resolution(d2, required, kappa, n)?;
    let nf = n as f64;
    let h = pair.params.hurst;
    let scale = nf.powf(h);
    let xs = midpoints(&pair.path1, scale);
    let ys = midpoints(&pair.path2, scale);
    let sum = double_sum(&xs, &ys, f.dim, |r2| f.eval_r2(r2));
    let value = nf.powf((2.0 + pair.params.hd()) / 2.0) * sum * d1 * d2;
    Ok(FunctionalSample {
        value,
        n,
        grid_step: d1,
        f_id: f.id().to_string(),
        seed_info: None,
    })
}

/// The same functional from paths on `[0, n t1] x [0, n t2]`:
/// `n^{(Hd-2)/2} int int f(X(u, v)) du dv`. By self-similarity it has the
/// law of [`evaluate_f`]. Cells must be no wider than `1/kappa`.
pub fn evaluate_f_unscaled(
    pair: &FbmPathPair,
    f: &TestFunction,
    n: u64,
    kappa: f64,
) -> Result<FunctionalSample> {
    check_kappa(kappa)?;
    check_dims(pair, f.dim)?;
    check_beta(f, &pair.params)?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let d1 = cell_width(&pair.grid1)?;
    let d2 = cell_width(&pair.grid2)?;
    check_resolution(d1, 1.0 / kappa, kappa, n)?;
    check_resolution(d2, 1.0 / kappa, kappa, n)?;
    let xs = midpoints(&pair.path1, 1.0);
    let ys = midpoints(&pair.path2, 1.0);
    let sum = double_sum(&xs, &ys, f.dim, |r2| f.eval_r2(r2));
    let value = (n as f64).powf((pair.params.hd() - 2.0) / 2.0) * sum * d1 * d2;
    Ok(FunctionalSample {
        value,
        n,
        grid_step: d1 / n as f64,
        f_id: f.id().to_string(),
        seed_info: None,
    })
}

/// `alpha_eps = int int p_eps(X(u, v)) du dv` with `p_eps` the centered
/// Gaussian density of covariance `eps^2 I`.
pub fn estimate_local_time(pair: &FbmPathPair, epsilon: f64) -> Result<LocalTimeEstimate> {
    pair.params.require_lt()?;
    check_epsilon(epsilon)?;
    let d1 = cell_width(&pair.grid1)?;
    let d2 = cell_width(&pair.grid2)?;
    let kernel = GaussianDensity {
        dim: pair.params.dim,
        variance: epsilon * epsilon,
    };
    let xs = midpoints(&pair.path1, 1.0);
    let ys = midpoints(&pair.path2, 1.0);
    let sum = double_sum(&xs, &ys, kernel.dim, |r2| kernel.eval_r2(r2));
    Ok(LocalTimeEstimate {
        value: sum * d1 * d2,
        epsilon,
        grid_step: d1,
    })
}

/// `n^{Hd} int int g(n^H X(u, v)) du dv`, whose mean tends to
/// `E[alpha(t1, t2)] int g` as `n` grows.
pub fn lln_functional<G: RadialProfile + ?Sized>(
    pair: &FbmPathPair,
    g: &G,
    n: u64,
    kappa: f64,
) -> Result<f64> {
    check_kappa(kappa)?;
    check_dims(pair, g.dim())?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let d1 = cell_width(&pair.grid1)?;
    let d2 = cell_width(&pair.grid2)?;
    let required = 1.0 / (kappa * n as f64);
    check_resolution(d1, required, kappa, n)?;
    check_resolution(d2, required, kappa, n)?;
    let nf = n as f64;
    let scale = nf.powf(pair.params.hurst);
    let xs = midpoints(&pair.path1, scale);
    let ys = midpoints(&pair.path2, scale);
    let sum = double_sum(&xs, &ys, g.dim(), |r2| g.eval_r2(r2));
    Ok(nf.powf(pair.params.hd()) * sum * d1 * d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use crate::test_functions::{make_gaussian_difference, RadialTable};

    fn params() -> ModelParams {
        ModelParams::new(0.75, 2, 1.0, 1.0).unwrap()
    }

    fn pair(plan: &PairPlan, i: u64) -> FbmPathPair {
        plan.sample(
            &mut stream(1, Purpose::FunctionalPath1, 0, i),
            &mut stream(1, Purpose::FunctionalPath2, 0, i),
        )
        .unwrap()
    }

    #[test]
    fn cell_counts_respect_the_rule() {
        assert_eq!(functional_cells(1.0, 64, 4.0), 256);
        assert_eq!(functional_cells(0.5, 3, 4.0), 6);
        // eps^{1/H} / 4 at eps = 0.025, H = 0.75
        let c = local_time_cells(1.0, 0.025, 0.75);
        assert!(1.0 / c as f64 <= 0.025f64.powf(4.0 / 3.0) / 4.0);
        assert!(1.0 / (c - 1) as f64 > 0.025f64.powf(4.0 / 3.0) / 4.0);
    }

    #[test]
    fn zero_function_gives_zero() {
        let plan = PairPlan::for_functional(&params(), 4, 4.0, SamplerKind::Auto).unwrap();
        let p = pair(&plan, 0);
        let zero = TestFunction::tabulated(2, RadialTable::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap())
            .unwrap();
        assert_eq!(evaluate_f(&p, &zero, 4, 4.0).unwrap().value, 0.0);
    }

    #[test]
    fn refuses_coarse_grids() {
        let plan = PairPlan::for_functional(&params(), 4, 4.0, SamplerKind::Auto).unwrap();
        let p = pair(&plan, 0);
        let f = make_gaussian_difference(2);
        assert!(evaluate_f(&p, &f, 4, 4.0).is_ok());
        match evaluate_f(&p, &f, 8, 4.0) {
            Err(Error::Resolution { required, .. }) => assert!((required - 1.0 / 32.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(evaluate_f(&p, &f, 4, 3.0).is_err());
        assert!(matches!(
            evaluate_f(&p, &make_gaussian_difference(3), 4, 4.0),
            Err(Error::DimensionMismatch { .. })
        ));
        let wrong_beta = make_gaussian_difference(2).with_beta(0.5);
        assert!(matches!(evaluate_f(&p, &wrong_beta, 4, 4.0), Err(Error::NotInSpace(_))));
    }

    #[test]
    fn midpoint_sum_by_hand() {
        // one cell per path: the only midpoint is grid index 1
        let params = params();
        let grid = midpoint_grid(1.0, 1).unwrap();
        let p1 = Path::from_coordinates(&[vec![0.0, 0.3, 0.5], vec![0.0, -0.2, 0.1]]).unwrap();
        let p2 = Path::from_coordinates(&[vec![0.0, 0.1, 0.9], vec![0.0, 0.4, 0.2]]).unwrap();
        let pair = FbmPathPair::new(params, grid.clone(), grid, p1, p2).unwrap();
        let lt = estimate_local_time(&pair, 0.5).unwrap();
        let r2 = 0.2f64.powi(2) + 0.6f64.powi(2);
        let expected = (-r2 / (2.0 * 0.25)).exp() / (2.0 * std::f64::consts::PI * 0.25);
        assert!((lt.value - expected).abs() < 1e-15);
        assert_eq!(lt.grid_step, 1.0);
    }

    #[test]
    fn local_time_is_nonnegative_and_deterministic() {
        let plan = PairPlan::for_local_time(&params(), 0.1, SamplerKind::Auto).unwrap();
        for i in 0..5 {
            let a = estimate_local_time(&pair(&plan, i), 0.1).unwrap();
            let b = estimate_local_time(&pair(&plan, i), 0.1).unwrap();
            assert!(a.value >= 0.0);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn local_time_vanishes_with_horizon() {
        let p = ModelParams::new(0.75, 2, 1e-6, 1.0).unwrap();
        let plan = PairPlan::with_cells(&p, 1e-6, 1.0, 4, 64, SamplerKind::Auto).unwrap();
        let v = estimate_local_time(&pair(&plan, 0), 0.1).unwrap().value;
        assert!((0.0..1e-5).contains(&v));
    }
}
