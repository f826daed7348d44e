//! Radial test functions with zero total integral, and the quantities that
//! enter the limit variance: the energy norm `||f||_beta` and weighted
//! `L^1` norms.
//!
//! The energy norm is
//!
//! ```text
//! ||f||_beta^2 = - int int f(x) f(y) |y - x|^beta dx dy,    0 < beta < 2,
//! ```
//!
//! which is nonnegative on zero-integral functions because `|z|^beta` is
//! conditionally negative definite. It is computed twice: in space
//! (autocorrelation of `f` against `|z|^beta`) and in frequency (through the
//! generalized Fourier transform of `|z|^beta`).

use std::f64::consts::PI;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Residual allowed in the zero-integral certificate.
pub const ZERO_INTEGRAL_TOL: f64 = 1e-8;

/// Surface area of the unit sphere in `R^d` (2 for `d = 1`).
pub fn sphere_area(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    2.0 * PI.powf(half) / libm::tgamma(half)
}

/// A function on `R^d` depending only on `|x|`.
pub trait RadialProfile: Sync {
    fn dim(&self) -> usize;

    /// Value at any point with `|x|^2 = r2`.
    fn eval_r2(&self, r2: f64) -> f64;

    fn eval_r(&self, r: f64) -> f64 {
        self.eval_r2(r * r)
    }

    /// Radius beyond which the profile is negligible (or zero).
    fn support_radius(&self) -> f64;
}

/// Tabulated radial profile, linearly interpolated, zero past the last node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTable {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl RadialTable {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: radii.len(),
                found: values.len(),
            });
        }
        if radii.len() < 2 {
            return Err(Error::Parse("tabulated profile needs at least two rows".into()));
        }
        if radii[0] != 0.0 {
            return Err(Error::Parse("tabulated radii must start at 0".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parse("tabulated radii must be strictly increasing".into()));
        }
        if radii.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Parse("tabulated profile has non-finite entries".into()));
        }
        Ok(Self { radii, values })
    }

    fn eval(&self, r: f64) -> f64 {
        let last = *self.radii.last().expect("non-empty");
        if r > last {
            return 0.0;
        }
        let k = self.radii.partition_point(|&x| x <= r);
        if k == 0 {
            return self.values[0];
        }
        if k >= self.radii.len() {
            return *self.values.last().expect("non-empty");
        }
        let (r0, r1) = (self.radii[k - 1], self.radii[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (r - r0) / (r1 - r0)
    }

    /// Breakpoints of the interpolant.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionKind {
    /// `exp(-|x|^2 / 2 w^2) - (w/n)^d exp(-|x|^2 / 2 n^2)` with `n < w`.
    GaussianDifference { wide: f64, narrow: f64 },
    /// `(|x|^2 / s^2 - d) exp(-|x|^2 / 2 s^2)`, i.e. `s^2` times the
    /// Laplacian of a Gaussian.
    GaussianDerivative { width: f64 },
    CustomTabulated { table: RadialTable },
}

/// A radial element of `H^beta_0`, `x -> amplitude * base(dilation * x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub kind: FunctionKind,
    pub dim: usize,
    pub amplitude: f64,
    pub dilation: f64,
    /// Exponent the function is attached to, when fixed by model parameters.
    pub beta: Option<f64>,
}

/// `2^{d/2}` exp(-|x|^2) subtracted from exp(-|x|^2/2): exact zero integral.
pub fn make_gaussian_difference(dim: usize) -> TestFunction {
    TestFunction::new(
        FunctionKind::GaussianDifference {
            wide: 1.0,
            narrow: std::f64::consts::FRAC_1_SQRT_2,
        },
        dim,
    )
}

pub fn make_gaussian_derivative(dim: usize) -> TestFunction {
    TestFunction::new(FunctionKind::GaussianDerivative { width: 1.0 }, dim)
}

impl TestFunction {
    fn new(kind: FunctionKind, dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            kind,
            dim,
            amplitude: 1.0,
            dilation: 1.0,
            beta: None,
        }
    }

    /// Built-in family by identifier.
    pub fn by_id(id: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        match id {
            "gaussian_difference" => Ok(make_gaussian_difference(dim)),
            "gaussian_derivative" => Ok(make_gaussian_derivative(dim)),
            other => Err(Error::Config(format!("unknown test function '{other}'"))),
        }
    }

    pub fn gaussian_difference(dim: usize, wide: f64, narrow: f64) -> Result<Self> {
        if !(wide > 0.0 && narrow > 0.0 && narrow != wide) {
            return Err(Error::Domain(format!("invalid widths ({wide}, {narrow})")));
        }
        Ok(Self::new(FunctionKind::GaussianDifference { wide, narrow }, dim))
    }

    /// Tabulated radial profile; rejected unless the zero-integral
    /// certificate passes.
    pub fn tabulated(dim: usize, table: RadialTable) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        let f = Self::new(FunctionKind::CustomTabulated { table }, dim);
        f.certify_zero_integral()?;
        Ok(f)
    }

    /// Reads a CSV with a first row `dimension,<d>` followed by `r,value`
    /// rows. Lines starting with `#` are ignored.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let mut records = rdr.records();
        let first = records
            .next()
            .ok_or(Error::Parse("empty tabulated function file".into()))??;
        if first.len() != 2 || &first[0] != "dimension" {
            return Err(Error::Parse(
                "first row must declare 'dimension,<d>'".into(),
            ));
        }
        let dim: usize = first[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension '{}'", &first[1])))?;
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in records.enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!("row {} must have two fields", line + 2)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number '{s}' in row {}", line + 2)))
            };
            radii.push(parse(&rec[0])?);
            values.push(parse(&rec[1])?);
        }
        Self::tabulated(dim, RadialTable::new(radii, values)?)
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            FunctionKind::GaussianDifference { .. } => "gaussian_difference",
            FunctionKind::GaussianDerivative { .. } => "gaussian_derivative",
            FunctionKind::CustomTabulated { .. } => "custom_tabulated",
        }
    }

    /// `f(lambda x)`.
    pub fn dilated(mut self, lambda: f64) -> Self {
        self.dilation *= lambda;
        self
    }

    /// `c f(x)`.
    pub fn scaled(mut self, c: f64) -> Self {
        self.amplitude *= c;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    /// Value at a point of `R^d`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_r2(x.iter().map(|v| v * v).sum())
    }

    /// Fourier transform `int f(x) e^{-i xi.x} dx` at `|xi| = k`.
    pub fn fourier(&self, k: f64) -> Result<f64> {
        let d = self.dim as f64;
        let lam = self.dilation;
        let q = k / lam;
        let base = match &self.kind {
            FunctionKind::GaussianDifference { wide, narrow } => {
                (2.0 * PI).powf(d / 2.0)
                    * wide.powf(d)
                    * ((-0.5 * wide * wide * q * q).exp() - (-0.5 * narrow * narrow * q * q).exp())
            }
            FunctionKind::GaussianDerivative { width } => {
                let s2 = width * width;
                -s2 * q * q * (2.0 * PI * s2).powf(d / 2.0) * (-0.5 * s2 * q * q).exp()
            }
            FunctionKind::CustomTabulated { .. } => {
                return Err(Error::Unsupported(
                    "no closed-form Fourier transform for tabulated functions".into(),
                ))
            }
        };
        Ok(self.amplitude * lam.powf(-d) * base)
    }

    /// `int f(x) dx`.
    pub fn total_integral(&self) -> Result<f64> {
        radial_integral(self, 0.0, |v| v)
    }

    /// Checks `|int f| <= 1e-8 max(1, int |f|)`.
    pub fn certify_zero_integral(&self) -> Result<f64> {
        let total = self.total_integral()?;
        let l1 = radial_integral(self, 0.0, f64::abs)?;
        if total.abs() <= ZERO_INTEGRAL_TOL * l1.max(1.0) {
            Ok(total)
        } else {
            Err(Error::NotInSpace(format!(
                "total integral {total:e} is not zero"
            )))
        }
    }
}

impl RadialProfile for TestFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn eval_r2(&self, r2: f64) -> f64 {
        let q = self.dilation * self.dilation * r2;
        let base = match &self.kind {
            FunctionKind::GaussianDifference { wide, narrow } => {
                let c = (wide / narrow).powi(self.dim as i32);
                (-0.5 * q / (wide * wide)).exp() - c * (-0.5 * q / (narrow * narrow)).exp()
            }
            FunctionKind::GaussianDerivative { width } => {
                let s2 = width * width;
                (q / s2 - self.dim as f64) * (-0.5 * q / s2).exp()
            }
            FunctionKind::CustomTabulated { table } => table.eval(q.sqrt()),
        };
        self.amplitude * base
    }

    fn support_radius(&self) -> f64 {
        let base = match &self.kind {
            FunctionKind::GaussianDifference { wide, narrow } => 10.0 * wide.max(*narrow),
            FunctionKind::GaussianDerivative { width } => 12.0 * width,
            FunctionKind::CustomTabulated { table } => *table.radii.last().expect("non-empty"),
        };
        base / self.dilation
    }
}

/// Kinks of the radial profile (for tabulated functions), in `|x|` units.
fn breakpoints(f: &TestFunction) -> Vec<f64> {
    match &f.kind {
        FunctionKind::CustomTabulated { table } => {
            table.radii.iter().map(|r| r / f.dilation).collect()
        }
        _ => Vec::new(),
    }
}

/// `|S^{d-1}| int_0^R g(f(r)) r^{beta + d - 1} dr` over the support.
fn radial_integral<G: Fn(f64) -> f64>(f: &TestFunction, beta: f64, g: G) -> Result<f64> {
    let d = f.dim as f64;
    let r_max = f.support_radius();
    let mut cuts = breakpoints(f);
    cuts.retain(|&r| r > 0.0 && r < r_max);
    let mut edges = vec![0.0];
    edges.extend(cuts);
    edges.push(r_max);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let est = integrate(
            |r| g(f.eval_r(r)) * r.powf(beta + d - 1.0),
            w[0],
            w[1],
            1e-15,
            1e-13,
            2000,
        )?;
        total += est.value;
    }
    Ok(sphere_area(f.dim) * total)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "energy norm needs 0 < beta < 2, got {beta}"
        )))
    }
}

fn finish_norm(f: &TestFunction, norm_sq: f64, quad_tol: f64) -> Result<f64> {
    let l1 = radial_integral(f, 0.0, f64::abs)?;
    let scale = (l1 * l1).max(f64::MIN_POSITIVE);
    if norm_sq < -quad_tol * scale {
        return Err(Error::NotInSpace(format!(
            "double integral of f(x) f(y) |y-x|^beta is positive ({:e})",
            -norm_sq
        )));
    }
    Ok(norm_sq.max(0.0).sqrt())
}

/// `||f||_beta` from the spatial double integral.
///
/// With `z = y - x` in radial coordinates the double integral becomes
/// `|S^{d-1}| int rho^{beta+d-1} C(rho) drho`, where `C` is the
/// autocorrelation of `f`, itself an integral over `|x|` and the angle
/// between `x` and `z`.
pub fn beta_norm_direct(f: &TestFunction, beta: f64, quad_tol: f64) -> Result<f64> {
    check_beta(beta)?;
    let d = f.dim;
    let r_max = f.support_radius();
    let l1 = radial_integral(f, 0.0, f64::abs)?;
    if l1 == 0.0 {
        return Ok(0.0);
    }
    let abs_floor = 1e-15 * l1 * l1;
    let tol = quad_tol.min(1e-9);
    // nested tolerances stay tighter than the outer one, but not below
    // what double precision can deliver
    let angular_tol = (tol * 1e-3).max(1e-12);
    let radial_tol = (tol * 1e-2).max(1e-12);

    // Angular average of f(|x + z|) over the direction of x.
    let angular = |r: f64, rho: f64| -> Result<f64> {
        if d == 1 {
            return Ok(f.eval_r(r + rho) + f.eval_r((r - rho).abs()));
        }
        let sd2 = sphere_area(d - 1);
        let est = integrate(
            |theta| {
                let s2 = r * r + rho * rho + 2.0 * r * rho * theta.cos();
                f.eval_r2(s2.max(0.0)) * theta.sin().powi(d as i32 - 2)
            },
            0.0,
            PI,
            abs_floor * 1e-3,
            angular_tol,
            500,
        )?;
        Ok(sd2 * est.value)
    };

    let autocorr = |rho: f64| -> f64 {
        let mut edges = vec![0.0];
        edges.extend(breakpoints(f).into_iter().filter(|&b| b > 0.0 && b < r_max));
        edges.push(r_max);
        let mut total = 0.0;
        for w in edges.windows(2) {
            match integrate(
                |r| match angular(r, rho) {
                    Ok(a) => f.eval_r(r) * r.powi(d as i32 - 1) * a,
                    Err(_) => f64::NAN,
                },
                w[0],
                w[1],
                abs_floor * 1e-2,
                radial_tol,
                1000,
            ) {
                Ok(e) => total += e.value,
                Err(_) => return f64::NAN,
            }
        }
        total
    };

    let outer = integrate(
        |rho| {
            if rho == 0.0 {
                return 0.0;
            }
            rho.powf(beta + d as f64 - 1.0) * autocorr(rho)
        },
        0.0,
        2.0 * r_max,
        abs_floor,
        tol,
        2000,
    )?
    .value;
    let norm_sq = -sphere_area(d) * outer;
    finish_norm(f, norm_sq, quad_tol)
}

/// Constant `c` with `||f||^2 = c int |f^(xi)|^2 |xi|^{-beta-d} dxi`.
pub fn fourier_norm_constant(beta: f64, dim: usize) -> f64 {
    let d = dim as f64;
    let kernel = 2f64.powf(beta + d) * PI.powf(d / 2.0) * libm::tgamma((beta + d) / 2.0)
        / libm::tgamma(-beta / 2.0).abs();
    kernel / (2.0 * PI).powf(d)
}

/// `||f||_beta` from the Fourier side, for families with a closed-form
/// transform.
pub fn beta_norm_fourier(f: &TestFunction, beta: f64, quad_tol: f64) -> Result<f64> {
    check_beta(beta)?;
    f.fourier(0.0)?;
    let d = f.dim;
    let k_max = match &f.kind {
        FunctionKind::GaussianDifference { wide, narrow } => 12.0 / wide.min(*narrow),
        FunctionKind::GaussianDerivative { width } => 14.0 / width,
        FunctionKind::CustomTabulated { .. } => unreachable!("rejected above"),
    } * f.dilation;
    let peak = f.amplitude.abs() * f.dilation.powf(-(d as f64));
    if peak == 0.0 {
        return Ok(0.0);
    }
    let est = integrate(
        |k| {
            if k == 0.0 {
                return 0.0;
            }
            let v = f.fourier(k).unwrap_or(f64::NAN);
            v * v * k.powf(-beta - 1.0)
        },
        0.0,
        k_max,
        1e-16 * peak * peak,
        quad_tol.min(1e-10) * 1e-2,
        2000,
    )?;
    let norm_sq = fourier_norm_constant(beta, d) * sphere_area(d) * est.value;
    finish_norm(f, norm_sq, quad_tol)
}

/// `int |g(x)| |x|^beta dx` for a radial profile, extending the domain until
/// the truncated integrals converge.
pub fn weighted_l1_profile<P: RadialProfile + ?Sized>(g: &P, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("weight exponent {beta} must be >= 0")));
    }
    let d = g.dim() as f64;
    let piece = |a: f64, b: f64| -> Result<f64> {
        Ok(integrate(
            |r| g.eval_r(r).abs() * r.powf(beta + d - 1.0),
            a,
            b,
            1e-300,
            1e-12,
            4000,
        )?
        .value)
    };
    let mut radius = g.support_radius();
    let mut total = piece(0.0, radius)?;
    const DOUBLINGS: usize = 40;
    for _ in 0..DOUBLINGS {
        let extra = piece(radius, 2.0 * radius)?;
        total += extra;
        radius *= 2.0;
        if extra <= 1e-12 * total {
            return Ok(sphere_area(g.dim()) * total);
        }
    }
    Err(Error::NotInSpace(format!(
        "weighted L1 norm with exponent {beta} keeps growing past radius {radius:e}"
    )))
}

/// `int |f(x)| |x|^beta dx`.
pub fn weighted_l1(f: &TestFunction, beta: f64) -> Result<f64> {
    weighted_l1_profile(f, beta)
}

/// `int int |f(x) f(y)| |y|^beta dx dy`, the factor in the uniform
/// second-moment bound.
pub fn tightness_integral(f: &TestFunction, beta: f64) -> Result<f64> {
    Ok(weighted_l1(f, 0.0)? * weighted_l1(f, beta)?)
}

/// Centered Gaussian density with covariance `variance * I` in `R^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDensity {
    pub dim: usize,
    pub variance: f64,
}

impl GaussianDensity {
    pub fn standard(dim: usize) -> Self {
        Self { dim, variance: 1.0 }
    }
}

impl RadialProfile for GaussianDensity {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn eval_r2(&self, r2: f64) -> f64 {
        (2.0 * PI * self.variance).powf(-(self.dim as f64) / 2.0) * (-0.5 * r2 / self.variance).exp()
    }

    fn support_radius(&self) -> f64 {
        10.0 * self.variance.sqrt()
    }
}
