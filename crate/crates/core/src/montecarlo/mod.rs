//! Replicated experiments: samples of `F_n`, samples of the limit law
//! `sqrt(D) ||f|| sqrt(alpha) Z`, and their comparison.
//!
//! Every random draw comes from a stream keyed by
//! `(master_seed, purpose, n, replication)`, so results do not depend on
//! the number of worker threads.

mod output;
mod stats;

pub use output::{csv_rows, write_csv, write_json, CsvRow};
pub use stats::{
    correlation, empirical_moment, ks_critical_1pct, ks_statistic, mean_se, two_sample_compare,
    KsResult, MomentEstimate, KS_COEFFICIENT_1PCT,
};

use std::fs::File;
use std::path::PathBuf;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{alpha_moment, compute_d, MomentPrediction};
use crate::error::{Error, Result};
use crate::functionals::{estimate_local_time, evaluate_f, FunctionalSample, PairPlan, MIN_KAPPA};
use crate::gaussian::SamplerKind;
use crate::params::ModelParams;
use crate::qmc::QmcBudget;
use crate::quadrature::QuadratureSpec;
use crate::rng::{Purpose, StreamKey};
use crate::test_functions::{beta_norm_direct, beta_norm_fourier, FunctionKind, TestFunction};

/// Highest moment order reported.
pub const MAX_ORDER: u32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub f_id: String,
    /// Radial table for `f_id = "custom_tabulated"`.
    pub f_table: Option<PathBuf>,
    pub n_values: Vec<u64>,
    pub replications: usize,
    pub master_seed: u64,
    pub kappa: f64,
    pub epsilon_schedule: Vec<f64>,
    pub output_path: Option<PathBuf>,
    /// Size of the limit-law sample used for the KS comparison.
    pub limit_draws: usize,
    pub sampler: SamplerKind,
    pub quadrature: QuadratureSpec,
    pub qmc: QmcBudget,
}

impl ExperimentConfig {
    pub fn new(params: ModelParams, f_id: &str) -> Self {
        Self {
            params,
            f_id: f_id.to_string(),
            f_table: None,
            n_values: vec![16, 64],
            replications: 10_000,
            master_seed: 0,
            kappa: 4.0,
            epsilon_schedule: vec![0.1, 0.05, 0.025],
            output_path: None,
            limit_draws: 10_000,
            sampler: SamplerKind::Auto,
            quadrature: QuadratureSpec::default(),
            qmc: QmcBudget::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::Config("replications must be at least 2".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values must not be empty".into()));
        }
        if self.n_values.windows(2).any(|w| w[1] <= w[0]) || self.n_values[0] == 0 {
            return Err(Error::Config("n_values must be positive and increasing".into()));
        }
        if !(self.kappa >= MIN_KAPPA) {
            return Err(Error::Config(format!("kappa must be at least {MIN_KAPPA}")));
        }
        if self.epsilon_schedule.is_empty() || self.epsilon_schedule.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("epsilon_schedule must hold positive values".into()));
        }
        if self.limit_draws < 2 {
            return Err(Error::Config("limit_draws must be at least 2".into()));
        }
        self.quadrature.validate()
    }

    /// Smallest scheduled bandwidth.
    pub fn finest_epsilon(&self) -> f64 {
        self.epsilon_schedule.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The test function, attached to `beta = 2/H - d`.
    pub fn test_function(&self) -> Result<TestFunction> {
        let d = self.params.dim;
        let f = match (self.f_id.as_str(), &self.f_table) {
            ("custom_tabulated", Some(path)) => TestFunction::from_csv(File::open(path)?)?,
            ("custom_tabulated", None) => {
                return Err(Error::Config("custom_tabulated needs a table file".into()))
            }
            (id, _) => TestFunction::by_id(id, d)?,
        };
        if f.dim != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: f.dim,
            });
        }
        Ok(f.with_beta(self.params.beta()))
    }
}

/// Deterministic ingredients of the predicted limit moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitConstants {
    pub d_constant: f64,
    pub d_error: f64,
    pub beta: f64,
    pub beta_norm: f64,
    /// `E[(sqrt(alpha) Z)^{2m}]` for `m = 1, 2, 3`.
    pub alpha_moments: Vec<MomentPrediction>,
}

impl LimitConstants {
    /// Predicted `E[F^p]` under the limit law: zero for odd `p`, and
    /// `D^m ||f||^{2m} E[(sqrt(alpha) Z)^{2m}]` for `p = 2m`.
    pub fn predicted_moment(&self, p: u32) -> f64 {
        if p % 2 == 1 {
            return 0.0;
        }
        let m = p / 2;
        match self.alpha_moments.get(m as usize - 1) {
            Some(a) => (self.d_constant * self.beta_norm.powi(2)).powi(m as i32) * a.value,
            None => f64::NAN,
        }
    }
}

/// `||f||_beta`, from the Fourier side when a transform is available.
pub fn beta_norm(f: &TestFunction, beta: f64, tol: f64) -> Result<f64> {
    match f.kind {
        FunctionKind::CustomTabulated { .. } => beta_norm_direct(f, beta, tol),
        _ => beta_norm_fourier(f, beta, tol),
    }
}

pub fn limit_constants(cfg: &ExperimentConfig) -> Result<LimitConstants> {
    let p = &cfg.params;
    let f = cfg.test_function()?;
    let d = compute_d(p.hurst, p.dim, &cfg.quadrature)?;
    let beta = p.beta();
    let norm = beta_norm(&f, beta, cfg.quadrature.rel_tol)?;
    let alpha_moments = (1..=MAX_ORDER / 2)
        .map(|m| {
            let key = StreamKey::new(cfg.master_seed, Purpose::Qmc, 0, m as u64);
            alpha_moment(p, m, &cfg.quadrature, cfg.qmc, key)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitConstants {
        d_constant: d.value,
        d_error: d.error,
        beta,
        beta_norm: norm,
        alpha_moments,
    })
}

fn functional_keys(seed: u64, n: u64, i: u64) -> [StreamKey; 2] {
    [
        StreamKey::new(seed, Purpose::FunctionalPath1, n, i),
        StreamKey::new(seed, Purpose::FunctionalPath2, n, i),
    ]
}

/// One replication of `F_n` with the streams it used.
pub fn functional_sample(
    plan: &PairPlan,
    f: &TestFunction,
    n: u64,
    kappa: f64,
    seed: u64,
    index: u64,
) -> Result<FunctionalSample> {
    let keys = functional_keys(seed, n, index);
    let pair = plan.sample_keyed(keys[0], keys[1])?;
    let mut s = evaluate_f(&pair, f, n, kappa)?;
    s.seed_info = Some(keys);
    Ok(s)
}

/// `count` independent values of `F_n`, in replication order.
pub fn functional_samples(
    params: &ModelParams,
    f: &TestFunction,
    n: u64,
    kappa: f64,
    sampler: SamplerKind,
    seed: u64,
    count: usize,
) -> Result<Vec<f64>> {
    let plan = PairPlan::for_functional(params, n, kappa, sampler)?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| functional_sample(&plan, f, n, kappa, seed, i).map(|s| s.value))
        .collect()
}

/// `count` independent values of `alpha_eps(t1, t2)` drawn from the path
/// streams of `purposes`.
pub fn local_time_samples(
    params: &ModelParams,
    epsilon: f64,
    sampler: SamplerKind,
    seed: u64,
    purposes: (Purpose, Purpose),
    count: usize,
) -> Result<Vec<f64>> {
    let plan = PairPlan::for_local_time(params, epsilon, sampler)?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let pair = plan.sample_keyed(
                StreamKey::new(seed, purposes.0, 0, i),
                StreamKey::new(seed, purposes.1, 0, i),
            )?;
            Ok(estimate_local_time(&pair, epsilon)?.value)
        })
        .collect()
}

/// Draws from the limit law together with their mixing variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub epsilon: f64,
    pub values: Vec<f64>,
    pub alphas: Vec<f64>,
}

/// `draws` values of `sqrt(D alpha_eps) ||f|| Z` at the finest scheduled
/// bandwidth. The paths and `Z` come from stream families disjoint from
/// those of the functional samples.
pub fn sample_limit_law(cfg: &ExperimentConfig, draws: usize) -> Result<LimitSample> {
    cfg.validate()?;
    cfg.params.require_clt()?;
    let constants = limit_constants(cfg)?;
    sample_limit_law_with(cfg, &constants, draws)
}

pub fn sample_limit_law_with(
    cfg: &ExperimentConfig,
    constants: &LimitConstants,
    draws: usize,
) -> Result<LimitSample> {
    cfg.params.require_clt()?;
    cfg.params.require_lt()?;
    if draws == 0 {
        return Err(Error::Empty("limit-law draws"));
    }
    let eps = cfg.finest_epsilon();
    let alphas = local_time_samples(
        &cfg.params,
        eps,
        cfg.sampler,
        cfg.master_seed,
        (Purpose::LimitPath1, Purpose::LimitPath2),
        draws,
    )?;
    let scale = constants.d_constant.sqrt() * constants.beta_norm;
    let values = alphas
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut rng = StreamKey::new(cfg.master_seed, Purpose::LimitGaussian, 0, i as u64).stream();
            let z: f64 = rng.sample(StandardNormal);
            scale * a.sqrt() * z
        })
        .collect();
    Ok(LimitSample {
        epsilon: eps,
        values,
        alphas,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub p: u32,
    pub empirical: f64,
    pub se: f64,
    pub predicted: f64,
    /// `(empirical - predicted) / se`.
    pub z: f64,
}

fn moment_rows(samples: &[f64], constants: &LimitConstants) -> Result<Vec<MomentRow>> {
    (1..=MAX_ORDER)
        .map(|p| {
            let e = empirical_moment(samples, p)?;
            let predicted = constants.predicted_moment(p);
            Ok(MomentRow {
                p,
                empirical: e.value,
                se: e.se,
                predicted,
                z: (e.value - predicted) / e.se,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NReport {
    pub n: u64,
    pub cells: (usize, usize),
    pub replications: usize,
    pub moments: Vec<MomentRow>,
    pub ks: KsResult,
}

impl NReport {
    pub fn moment(&self, p: u32) -> Option<&MomentRow> {
        self.moments.iter().find(|r| r.p == p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub params: ModelParams,
    pub f_id: String,
    pub master_seed: u64,
    pub kappa: f64,
    pub epsilon: f64,
    pub constants: LimitConstants,
    pub per_n: Vec<NReport>,
    /// Moments of the limit-law sample against the same predictions.
    pub limit_moments: Vec<MomentRow>,
    pub limit_draws: usize,
}

impl MomentReport {
    pub fn for_n(&self, n: u64) -> Option<&NReport> {
        self.per_n.iter().find(|r| r.n == n)
    }
}

/// Report plus the raw samples behind it.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: MomentReport,
    /// Samples of `F_n`, one vector per entry of `n_values`.
    pub samples: Vec<Vec<f64>>,
    pub limit: LimitSample,
}

pub fn run_clt_experiment(cfg: &ExperimentConfig) -> Result<MomentReport> {
    Ok(run_clt_experiment_full(cfg)?.report)
}

pub fn run_clt_experiment_full(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    cfg.params.require_clt()?;
    let f = cfg.test_function()?;
    f.certify_zero_integral()?;
    log::info!("computing limit constants");
    let constants = limit_constants(cfg)?;
    log::info!(
        "D = {:.10}, ||f|| = {:.10}, E[alpha] = {:.10}",
        constants.d_constant,
        constants.beta_norm,
        constants.alpha_moments[0].value
    );
    log::info!("sampling {} limit-law draws", cfg.limit_draws);
    let limit = sample_limit_law_with(cfg, &constants, cfg.limit_draws)?;

    let mut per_n = Vec::with_capacity(cfg.n_values.len());
    let mut samples = Vec::with_capacity(cfg.n_values.len());
    for &n in &cfg.n_values {
        let plan = PairPlan::for_functional(&cfg.params, n, cfg.kappa, cfg.sampler)?;
        log::info!("n = {n}: {} replications on {:?} cells", cfg.replications, plan.cells());
        let xs: Vec<f64> = (0..cfg.replications as u64)
            .into_par_iter()
            .map(|i| functional_sample(&plan, &f, n, cfg.kappa, cfg.master_seed, i).map(|s| s.value))
            .collect::<Result<_>>()?;
        per_n.push(NReport {
            n,
            cells: plan.cells(),
            replications: cfg.replications,
            moments: moment_rows(&xs, &constants)?,
            ks: two_sample_compare(&xs, &limit.values)?,
        });
        samples.push(xs);
    }
    let report = MomentReport {
        params: cfg.params,
        f_id: cfg.f_id.clone(),
        master_seed: cfg.master_seed,
        kappa: cfg.kappa,
        epsilon: limit.epsilon,
        limit_moments: moment_rows(&limit.values, &constants)?,
        limit_draws: cfg.limit_draws,
        constants,
        per_n,
    };
    Ok(ExperimentOutput {
        report,
        samples,
        limit,
    })
}
