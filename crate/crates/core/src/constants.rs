//! Deterministic constants: `D_{H,d}`, moments of the mixing law
//! `sqrt(alpha) Z`, and the two integral bounds used for tightness.
//!
//! Throughout, `r(u, v) = u^{2H} + v^{2H}` is the variance of one coordinate
//! of `B1_u - B2_v`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::cov_unchecked;
use crate::params::ModelParams;
use crate::qmc::{rqmc, QmcBudget, QmcEstimate};
use crate::quadrature::{
    integrate, pairwise_sum, refine_levels, LevelEstimate, QuadratureSpec, Refinement,
    Substitution, TanhSinhRule,
};
use crate::rng::StreamKey;

/// First tanh-sinh level tried by the refinement loops.
const START_LEVEL: u32 = 1;

fn regime(requirement: &'static str, hurst: f64, dim: usize) -> Error {
    Error::Regime {
        requirement,
        hurst,
        dim,
    }
}

fn check_hurst(hurst: f64, dim: usize) -> Result<()> {
    if !(hurst > 0.0 && hurst < 1.0) || dim == 0 {
        return Err(Error::Domain(format!(
            "need 0 < H < 1 and d >= 1, got H = {hurst}, d = {dim}"
        )));
    }
    Ok(())
}

/// `(2m-1)!!`.
pub fn double_factorial_odd(m: u32) -> f64 {
    (1..=m).map(|k| (2 * k - 1) as f64).product()
}

/// Result of a converged quadrature for `D_{H,d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DReport {
    pub hurst: f64,
    pub dim: usize,
    pub value: f64,
    /// Change between the last two refinement levels.
    pub error: f64,
    pub substitution: Substitution,
    pub levels: Vec<LevelEstimate>,
}

impl DReport {
    /// Relative changes between successive levels, oldest first.
    pub fn relative_changes(&self) -> Vec<f64> {
        self.levels
            .iter()
            .skip(1)
            .map(|l| l.delta / l.value.abs())
            .collect()
    }
}

fn d_prefactor(dim: usize) -> f64 {
    4.0 / (2.0 * PI).powf(dim as f64 / 2.0)
}

/// `r^{-d/2} (1 - e^{-1/(2r)})`.
fn d_kernel(r: f64, half_d: f64) -> f64 {
    -(-0.5 / r).exp_m1() * r.powf(-half_d)
}

/// Integral of `g` over `(0, inf)`, split at 1, the tail mapped by
/// `w = 1/(1+x)`.
fn half_line(rule: &TanhSinhRule, g: impl Fn(f64) -> f64) -> f64 {
    let head = rule.integrate(0.0, 1.0, &g);
    let tail = rule.integrate(0.0, 0.5, |w| {
        let x = (1.0 - w) / w;
        g(x) / (w * w)
    });
    head + tail
}

/// The constant
///
/// ```text
/// D_{H,d} = 4/(2 pi)^{d/2} int_0^inf int_0^inf r^{-d/2} (1 - exp(-1/(2r))) du dv
/// ```
///
/// finite for `2/(d+2) < H` and `H d < 2`.
///
/// With `Substitution::Power2H` (and `None`, which falls back to it) the
/// variables `a = u^{2H}`, `b = v^{2H}`, `a = R c`, `b = R (1-c)` turn the
/// integrand into `(c(1-c))^{1/(2H)-1}` times a function of `R` alone.
/// `RadialPolar` integrates in polar coordinates of the `(u, v)` plane.
/// Both run tanh-sinh at increasing levels until two successive levels
/// agree to `spec.rel_tol`.
pub fn compute_d(hurst: f64, dim: usize, spec: &QuadratureSpec) -> Result<DReport> {
    check_hurst(hurst, dim)?;
    spec.validate()?;
    let d = dim as f64;
    if hurst <= 2.0 / (d + 2.0) {
        return Err(regime("H > 2/(d+2)", hurst, dim));
    }
    if hurst * d >= 2.0 {
        return Err(regime("H d < 2", hurst, dim));
    }
    let half_d = d / 2.0;
    let pref = d_prefactor(dim);
    let refinement = match spec.substitution {
        Substitution::Power2H | Substitution::None => {
            let gamma = 1.0 / (2.0 * hurst) - 1.0;
            let jac = (1.0 / (2.0 * hurst)).powi(2);
            let p = 2.0 * gamma + 1.0;
            refine_levels(START_LEVEL, spec.max_subdivisions, spec.rel_tol, spec.abs_tol, |lvl| {
                let rule = TanhSinhRule::new(lvl);
                let c_int = 2.0 * rule.integrate(0.0, 0.5, |c| (c * (1.0 - c)).powf(gamma));
                let r_int = half_line(&rule, |r| r.powf(p) * d_kernel(r, half_d));
                pref * jac * c_int * r_int
            })?
        }
        Substitution::RadialPolar => {
            refine_levels(START_LEVEL, spec.max_subdivisions, spec.rel_tol, spec.abs_tol, |lvl| {
                let rule = TanhSinhRule::new(lvl);
                let half = rule.integrate(0.0, FRAC_PI_2 / 2.0, |theta| {
                    let s = theta.cos().powf(2.0 * hurst) + theta.sin().powf(2.0 * hurst);
                    half_line(&rule, |rho| rho * d_kernel(rho.powf(2.0 * hurst) * s, half_d))
                });
                pref * 2.0 * half
            })?
        }
    };
    Ok(DReport {
        hurst,
        dim,
        value: refinement.value,
        error: refinement.error,
        substitution: spec.substitution,
        levels: refinement.levels,
    })
}

/// Exponent of the power map `x -> x^q/(x^q + (1-x)^q)` that keeps
/// `(du dv) r^{-d/2}` bounded near a coincidence.
fn power_exponent(hd: f64) -> i32 {
    ((2.0 / (2.0 - hd)).ceil() as i32).max(2)
}

/// Map of `(0,1)` onto itself flattening both endpoints; returns the image
/// and the derivative.
fn power_map(x: f64, q: i32) -> (f64, f64) {
    let a = x.powi(q);
    let b = (1.0 - x).powi(q);
    let s = a + b;
    let jac = q as f64 * (x * (1.0 - x)).powi(q - 1) / (s * s);
    (a / s, jac)
}

/// Quasi-Monte Carlo evaluation of `D_{H,d}` in the original `(u, v)`
/// variables, each mapped from `(0,1)` by `u = (y/(1-y))` with `y` the
/// power map of a uniform coordinate.
pub fn compute_d_qmc(hurst: f64, dim: usize, budget: QmcBudget, seed: u32) -> Result<QmcEstimate> {
    check_hurst(hurst, dim)?;
    let d = dim as f64;
    if hurst <= 2.0 / (d + 2.0) {
        return Err(regime("H > 2/(d+2)", hurst, dim));
    }
    if hurst * d >= 2.0 {
        return Err(regime("H d < 2", hurst, dim));
    }
    let q = power_exponent(hurst * d);
    let half_d = d / 2.0;
    let pref = d_prefactor(dim);
    let half_line_point = |x: f64| {
        let (y, jy) = power_map(x, q);
        let yc = 1.0 - y;
        (y / yc, jy / (yc * yc))
    };
    let est = rqmc(2, budget, seed, |x| {
        let (u, ju) = half_line_point(x[0]);
        let (v, jv) = half_line_point(x[1]);
        let r = u.powf(2.0 * hurst) + v.powf(2.0 * hurst);
        let val = d_kernel(r, half_d) * ju * jv;
        if val.is_finite() {
            val
        } else {
            0.0
        }
    })?;
    Ok(QmcEstimate {
        value: pref * est.value,
        std_error: pref * est.std_error,
        points: est.points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    Quadrature,
    QuasiMc,
}

/// Predicted `E[(sqrt(alpha) Z)^p]` for a standard normal `Z` independent
/// of `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPrediction {
    pub order: u32,
    pub value: f64,
    pub method: MomentMethod,
    pub error_estimate: f64,
}

impl MomentPrediction {
    /// `E[alpha^{p/2}]`, i.e. the value without the Gaussian factor.
    pub fn alpha_power(&self) -> f64 {
        if self.order % 2 == 1 {
            return 0.0;
        }
        self.value / double_factorial_odd(self.order / 2)
    }
}

/// Odd moments of a symmetric law vanish.
pub fn odd_moment(p: u32) -> Result<MomentPrediction> {
    if p % 2 == 0 {
        return Err(Error::Domain(format!("order {p} is not odd")));
    }
    Ok(MomentPrediction {
        order: p,
        value: 0.0,
        method: MomentMethod::Quadrature,
        error_estimate: 0.0,
    })
}

/// `int_0^{phi0} (c / cos phi)^{2-Hd} / (2-Hd) * s(phi)^{-d/2} dphi` with
/// `s(phi) = cos^{2H} + sin^{2H}`: the part of the rectangle integral below
/// the diagonal ray, after exact radial integration.
fn polar_sector(rule: &TanhSinhRule, c: f64, phi0: f64, hurst: f64, dim: usize) -> f64 {
    let hd = hurst * dim as f64;
    let e = 2.0 - hd;
    let half_d = dim as f64 / 2.0;
    rule.integrate(0.0, phi0, |phi| {
        let (sn, cs) = phi.sin_cos();
        let s = cs.powf(2.0 * hurst) + sn.powf(2.0 * hurst);
        (c / cs).powf(e) / e * s.powf(-half_d)
    })
}

/// `int_0^a int_0^b (u^{2H} + v^{2H})^{-d/2} du dv` for `H d < 2`.
pub fn rectangle_integral(
    hurst: f64,
    dim: usize,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Refinement> {
    check_hurst(hurst, dim)?;
    spec.validate()?;
    if hurst * dim as f64 >= 2.0 {
        return Err(regime("H d < 2", hurst, dim));
    }
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("rectangle sides must be positive, got ({a}, {b})")));
    }
    // Split along the diagonal ray; each sector uses the angle measured
    // from its own axis so that thin sectors keep full precision.
    let phi_a = (b / a).atan();
    let phi_b = (a / b).atan();
    refine_levels(START_LEVEL, spec.max_subdivisions, spec.rel_tol, spec.abs_tol, |lvl| {
        let rule = TanhSinhRule::new(lvl);
        polar_sector(&rule, a, phi_a, hurst, dim) + polar_sector(&rule, b, phi_b, hurst, dim)
    })
}

/// Determinant of the `m x m` covariance of `B1_{u_i} - B2_{v_i}` in one
/// coordinate, for points sorted by `u`. `du` and `dv` hold the absolute
/// pairwise distances. Works in the basis of successive increments so that
/// close points keep relative precision; returns `None` when the matrix is
/// numerically singular.
fn increment_determinant(hurst: f64, m: usize, du: &[[f64; 4]; 4], dv: &[[f64; 4]; 4]) -> Option<f64> {
    let h2 = 2.0 * hurst;
    // Index 0 is the origin, 1..=m the points.
    let dist = |i: usize, j: usize| du[i][j].powf(h2) + dv[i][j].powf(h2);
    let mut a = [[0.0f64; 3]; 3];
    for k in 1..=m {
        for l in k..=m {
            let c = 0.5 * (dist(k, l - 1) + dist(k - 1, l) - dist(k, l) - dist(k - 1, l - 1));
            a[k - 1][l - 1] = c;
            a[l - 1][k - 1] = c;
        }
    }
    // Cholesky with the smallest-variance increments pivoted last.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let mut l = [[0.0f64; 3]; 3];
    let mut det = 1.0;
    for (p, &i) in order.iter().enumerate() {
        let mut diag = a[i][i];
        for s in 0..p {
            diag -= l[p][s] * l[p][s];
        }
        if !(diag > 1e-10 * a[i][i]) {
            return None;
        }
        let piv = diag.sqrt();
        l[p][p] = piv;
        det *= diag;
        for (q, &j) in order.iter().enumerate().skip(p + 1) {
            let mut v = a[j][i];
            for s in 0..p {
                v -= l[q][s] * l[p][s];
            }
            l[q][p] = v / piv;
        }
    }
    Some(det)
}

/// Points of the ordered simplex `0 < x_1 < ... < x_m < t` by stick
/// breaking with power-mapped fractions. Returns the gaps and the Jacobian.
fn stick_breaking(x: &[f64], t: f64, q: i32, gaps: &mut [f64]) -> f64 {
    let mut remaining = t;
    let mut jac = 1.0;
    for (g, &xi) in gaps.iter_mut().zip(x) {
        let (w, jw) = power_map(xi, q);
        *g = remaining * w;
        jac *= remaining * jw;
        remaining *= 1.0 - w;
    }
    jac
}

/// Pairwise distances (origin at index 0) from the gaps of a sorted
/// configuration, as sums of gaps.
fn sorted_distances(gaps: &[f64]) -> [[f64; 4]; 4] {
    let mut d = [[0.0; 4]; 4];
    for i in 0..=gaps.len() {
        let mut acc = 0.0;
        for j in (i + 1)..=gaps.len() {
            acc += gaps[j - 1];
            d[i][j] = acc;
            d[j][i] = acc;
        }
    }
    d
}

/// `int_{E^m} (det A_1)^{-d/2}` over `E = [0,t1] x [0,t2]` by randomized
/// QMC. Points are ordered in `u` (factor `m!`) and, in `v`, sorted and
/// then assigned by every permutation.
fn moment_integral_qmc(params: &ModelParams, m: usize, budget: QmcBudget, seed: u32) -> Result<QmcEstimate> {
    let hurst = params.hurst;
    let half_d = params.dim as f64 / 2.0;
    let q = power_exponent(params.hd());
    let perms = permutations(m);
    let m_fact: f64 = (1..=m).map(|k| k as f64).product();
    rqmc(2 * m, budget, seed, |x| {
        let mut gu = [0.0; 3];
        let mut gv = [0.0; 3];
        let ju = stick_breaking(&x[..m], params.t1, q, &mut gu[..m]);
        let jv = stick_breaking(&x[m..], params.t2, q, &mut gv[..m]);
        let du = sorted_distances(&gu[..m]);
        let dv_sorted = sorted_distances(&gv[..m]);
        let mut total = 0.0;
        for perm in &perms {
            // point i (in u order) receives the perm[i]-th smallest v
            let mut dv = [[0.0; 4]; 4];
            for i in 0..=m {
                for j in 0..=m {
                    let pi = if i == 0 { 0 } else { perm[i - 1] + 1 };
                    let pj = if j == 0 { 0 } else { perm[j - 1] + 1 };
                    dv[i][j] = dv_sorted[pi][pj];
                }
            }
            if let Some(det) = increment_determinant(hurst, m, &du, &dv) {
                total += det.powf(-half_d);
            }
        }
        let v = m_fact * total * ju * jv;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    })
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut v = p.clone();
            v.insert(pos, m - 1);
            out.push(v);
        }
    }
    out
}

/// `E[(sqrt(alpha(t1,t2)) Z)^{2m}] = (2m-1)!! / (2 pi)^{md/2} int_{E^m} (det A)^{-1/2}`.
///
/// `m = 1` reduces to a rectangle integral computed by quadrature; `m = 2, 3`
/// use randomized QMC seeded from `key`. Orders above 6 are not supported.
pub fn alpha_moment(
    params: &ModelParams,
    m: u32,
    spec: &QuadratureSpec,
    budget: QmcBudget,
    key: StreamKey,
) -> Result<MomentPrediction> {
    params.require_lt()?;
    if m == 0 || m > 3 {
        return Err(Error::Domain(format!("moment index m = {m} not in 1..=3")));
    }
    let norm = (2.0 * PI).powf(-(m as f64) * params.dim as f64 / 2.0) * double_factorial_odd(m);
    if m == 1 {
        let r = rectangle_integral(params.hurst, params.dim, params.t1, params.t2, spec)?;
        return Ok(MomentPrediction {
            order: 2,
            value: norm * r.value,
            method: MomentMethod::Quadrature,
            error_estimate: norm * r.error,
        });
    }
    alpha_moment_qmc(params, m, budget, key)
}

/// The QMC route of [`alpha_moment`], available for every `m` in `1..=3`.
pub fn alpha_moment_qmc(
    params: &ModelParams,
    m: u32,
    budget: QmcBudget,
    key: StreamKey,
) -> Result<MomentPrediction> {
    params.require_lt()?;
    if m == 0 || m > 3 {
        return Err(Error::Domain(format!("moment index m = {m} not in 1..=3")));
    }
    let norm = (2.0 * PI).powf(-(m as f64) * params.dim as f64 / 2.0) * double_factorial_odd(m);
    let est = moment_integral_qmc(params, m as usize, budget, key.seed_u32())?;
    Ok(MomentPrediction {
        order: 2 * m,
        value: norm * est.value,
        method: MomentMethod::QuasiMc,
        error_estimate: norm * est.std_error,
    })
}

/// Exact second-moment covariance entry, exposed for diagnostics.
pub fn field_covariance(hurst: f64, u: (f64, f64), v: (f64, f64)) -> f64 {
    cov_unchecked(u.0, v.0, hurst) + cov_unchecked(u.1, v.1, hurst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub a: f64,
    pub b: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaA1Report {
    pub points: Vec<RatioPoint>,
    pub max_ratio: f64,
}

impl LemmaA1Report {
    /// Largest relative deviation between any two ratios in the report.
    pub fn spread(&self) -> f64 {
        let lo = self.points.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
        (self.max_ratio - lo) / lo
    }
}

/// Ratios `int_0^a int_0^b r^{-d/2} / (a ^ b)^{2-Hd}` over `pairs`, for
/// `1 < H d < 2`.
pub fn verify_lemma_a1(
    hurst: f64,
    dim: usize,
    pairs: &[(f64, f64)],
    spec: &QuadratureSpec,
) -> Result<LemmaA1Report> {
    check_hurst(hurst, dim)?;
    let hd = hurst * dim as f64;
    if !(1.0 < hd && hd < 2.0) {
        return Err(regime("1 < H d < 2", hurst, dim));
    }
    if pairs.is_empty() {
        return Err(Error::Empty("(a, b) grid"));
    }
    let mut points = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        let r = rectangle_integral(hurst, dim, a, b, spec)?;
        let ratio = r.value / a.min(b).powf(2.0 - hd);
        points.push(RatioPoint { a, b, ratio });
    }
    let max_ratio = points.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    if !max_ratio.is_finite() {
        return Err(Error::Quadrature("lemma ratio is not finite".into()));
    }
    Ok(LemmaA1Report { points, max_ratio })
}

/// `J(a) = int_0^inf t^{-a} |sin t| dt` for `1 < a < 2`.
pub fn sine_power_integral(a: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(a > 1.0 && a < 2.0) {
        return Err(Error::Domain(format!("exponent {a} not in (1, 2)")));
    }
    const PERIODS: usize = 4000;
    let first = refine_levels(START_LEVEL, spec.max_subdivisions, spec.rel_tol, spec.abs_tol, |lvl| {
        TanhSinhRule::new(lvl).integrate(0.0, PI, |t| t.sin() * t.powf(-a))
    })?;
    let mut parts = Vec::with_capacity(PERIODS);
    parts.push(first.value);
    for k in 1..PERIODS {
        let lo = k as f64 * PI;
        let est = integrate(|t| t.sin().abs() * t.powf(-a), lo, lo + PI, 0.0, 1e-13, 50)?;
        parts.push(est.value);
    }
    // |sin t| averages 2/pi; the oscillating remainder integrates to
    // O(T^{-a-1}) because T is a multiple of pi.
    let t = PERIODS as f64 * PI;
    parts.push(2.0 / PI * t.powf(1.0 - a) / (a - 1.0));
    Ok(pairwise_sum(&parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaA2Report {
    pub n: f64,
    pub y_norm: f64,
    /// `L(n, y)`.
    pub integral: f64,
    pub integral_se: f64,
    /// `L(n, y) n^{2-Hd} |y|^{d-2/H}`.
    pub ratio: f64,
    pub ratio_se: f64,
    pub draws: usize,
}

/// Estimates
///
/// ```text
/// L(n, y) = int_0^inf int_0^inf r^{-d/2} E|exp(i y.X / (n^H sqrt r)) - 1| dw ds
/// ```
///
/// with `X` standard normal in `R^d`. Writing `|e^{ix} - 1| = 2|sin(x/2)|`
/// and using the variables of [`compute_d`], the `(w, s)` integral reduces
/// to `(1/(2H))^2 B(1/(2H), 1/(2H)) 4 kappa^beta J(beta + 1)` with
/// `kappa = |y.X| / (2 n^H)`, `beta = 2/H - d`. The beta integral and `J`
/// are computed by quadrature, the expectation over `X` by Monte Carlo.
pub fn verify_lemma_a2<R: Rng + ?Sized>(
    hurst: f64,
    dim: usize,
    y: &[f64],
    n: f64,
    mc_draws: usize,
    spec: &QuadratureSpec,
    rng: &mut R,
) -> Result<LemmaA2Report> {
    check_hurst(hurst, dim)?;
    spec.validate()?;
    let d = dim as f64;
    let hd = hurst * d;
    if !(2.0 - hurst < hd && hd < 2.0) {
        return Err(regime("2 - H < H d < 2", hurst, dim));
    }
    if y.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: y.len(),
        });
    }
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(y_norm > 0.0 && y_norm.is_finite()) {
        return Err(Error::Domain("y must be a nonzero finite vector".into()));
    }
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Domain(format!("n = {n} must be positive")));
    }
    if mc_draws < 2 {
        return Err(Error::Domain("need at least two Monte Carlo draws".into()));
    }
    let projections: Vec<f64> = (0..mc_draws)
        .map(|_| y.iter().map(|&yi| yi * rng.sample::<f64, _>(StandardNormal)).sum())
        .collect();
    let (integral, integral_se) = lemma_a2_integral(hurst, dim, n, &projections, spec)?;
    let norm = n.powf(2.0 - hd) * y_norm.powf(d - 2.0 / hurst);
    Ok(LemmaA2Report {
        n,
        y_norm,
        integral,
        integral_se,
        ratio: integral * norm,
        ratio_se: integral_se * norm,
        draws: mc_draws,
    })
}

/// `L(n, y)` and its standard error from samples of the projection `y.X`.
pub fn lemma_a2_integral(
    hurst: f64,
    dim: usize,
    n: f64,
    projections: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    if projections.len() < 2 {
        return Err(Error::Empty("projection samples"));
    }
    let beta = 2.0 / hurst - dim as f64;
    let scale = 2.0 * n.powf(hurst);
    let draws: Vec<f64> = projections
        .iter()
        .map(|p| (p.abs() / scale).powf(beta))
        .collect();
    let (mean, se) = mean_and_se(&draws);
    let factor = lemma_a2_factor(hurst, beta, spec)?;
    Ok((factor * mean, factor * se))
}

/// The deterministic factor multiplying `E[kappa^beta]` in `L(n, y)`.
pub fn lemma_a2_factor(hurst: f64, beta: f64, spec: &QuadratureSpec) -> Result<f64> {
    let gamma = 1.0 / (2.0 * hurst) - 1.0;
    let c_int = refine_levels(START_LEVEL, spec.max_subdivisions, spec.rel_tol, spec.abs_tol, |lvl| {
        2.0 * TanhSinhRule::new(lvl).integrate(0.0, 0.5, |c| (c * (1.0 - c)).powf(gamma))
    })?;
    let j = sine_power_integral(beta + 1.0, spec)?;
    Ok((1.0 / (2.0 * hurst)).powi(2) * c_int.value * 4.0 * j)
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
