use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fbm_ilt::constants::{compute_d, verify_lemma_a1, verify_lemma_a2, DReport, MomentPrediction};
use fbm_ilt::gaussian::lnd_diagnostic;
use fbm_ilt::montecarlo::{
    empirical_moment, limit_constants, run_clt_experiment_full, sample_limit_law_with,
    two_sample_compare, write_csv, write_json, KsResult, MomentEstimate, MAX_ORDER,
};
use fbm_ilt::quadrature::LevelEstimate;
use fbm_ilt::rng::{Purpose, StreamKey};
use fbm_ilt::test_functions::{beta_norm_direct, beta_norm_fourier};
use fbm_ilt::{ModelParams, QuadratureSpec};
use serde::Serialize;

use crate::config::{hex_digest, RunConfig};
use crate::manifest::{unix_now, Header, RunManifest, Timing};
use crate::CliError;

/// Output directory plus the bookkeeping shared by every subcommand.
pub struct Run {
    pub dir: PathBuf,
    pub header: Header,
    created: bool,
    started_unix: f64,
    clock: Instant,
    files: Vec<PathBuf>,
}

impl Run {
    pub fn start(dir: PathBuf, config_hash: &str) -> Result<Self, CliError> {
        let created = !dir.exists();
        fs::create_dir_all(&dir)?;
        if created {
            log::info!("created output directory {}", dir.display());
        }
        Ok(Self {
            dir,
            header: Header::new(config_hash),
            created,
            started_unix: unix_now(),
            clock: Instant::now(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn write_json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<PathBuf, CliError> {
        #[derive(Serialize)]
        struct Doc<'a, T> {
            header: &'a Header,
            #[serde(flatten)]
            body: &'a T,
        }
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(&Doc {
            header: &self.header,
            body,
        })?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    /// Records timings and outputs in the directory manifest.
    pub fn finish(self, subcommand: &str) -> Result<(), CliError> {
        let mut manifest = RunManifest::open(&self.dir, self.header.clone(), self.created);
        let timing = Timing {
            started_unix: self.started_unix,
            seconds: self.clock.elapsed().as_secs_f64(),
        };
        manifest.record(subcommand, timing, &self.files)?;
        manifest.write()?;
        for f in &self.files {
            println!("{}", f.display());
        }
        Ok(())
    }
}

/// Local-time existence first, so that `H d >= 2` is reported as such.
fn check_regime(params: &ModelParams) -> Result<(), CliError> {
    params.require_lt()?;
    params.require_clt()?;
    Ok(())
}

#[derive(Serialize)]
struct Tolerances {
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
    substitution: fbm_ilt::Substitution,
    qmc_points_per_replicate: u32,
    qmc_replicates: usize,
}

#[derive(Serialize)]
struct Mesh {
    levels: Vec<LevelEstimate>,
    relative_changes: Vec<f64>,
}

#[derive(Serialize)]
struct ConstantsDoc<'a> {
    hurst: f64,
    dimension: usize,
    t1: f64,
    t2: f64,
    test_function: &'a str,
    d_constant: f64,
    d_error: f64,
    beta: f64,
    beta_norm: f64,
    alpha_moments: &'a [MomentPrediction],
    tolerances: Tolerances,
    mesh: Mesh,
}

pub fn constants(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let exp = &cfg.experiment;
    let p = &exp.params;
    check_regime(p)?;
    let c = limit_constants(exp)?;
    let d: DReport = compute_d(p.hurst, p.dim, &exp.quadrature)?;
    let q = &exp.quadrature;
    let doc = ConstantsDoc {
        hurst: p.hurst,
        dimension: p.dim,
        t1: p.t1,
        t2: p.t2,
        test_function: &exp.f_id,
        d_constant: c.d_constant,
        d_error: c.d_error,
        beta: c.beta,
        beta_norm: c.beta_norm,
        alpha_moments: &c.alpha_moments,
        tolerances: Tolerances {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_subdivisions: q.max_subdivisions,
            substitution: q.substitution,
            qmc_points_per_replicate: exp.qmc.points_per_replicate,
            qmc_replicates: exp.qmc.replicates,
        },
        mesh: Mesh {
            relative_changes: d.relative_changes(),
            levels: d.levels,
        },
    };
    run.write_json("constants.json", &doc)?;
    Ok(())
}

fn write_samples_csv(path: &Path, header: &Header, columns: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut text = format!("# {}\n{}\n", header.line(), columns.join(","));
    for r in rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn simulate(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let exp = &cfg.experiment;
    check_regime(&exp.params)?;
    let out = run_clt_experiment_full(exp)?;
    let report = &out.report;
    for r in &report.per_n {
        for m in r.moments.iter().filter(|m| m.p <= 4) {
            log::info!(
                "n = {}: p = {} empirical {:.6} +- {:.6}, predicted {:.6} (z = {:.2})",
                r.n, m.p, m.empirical, m.se, m.predicted, m.z
            );
        }
        log::info!("n = {}: KS {:.5} (1% critical {:.5})", r.n, r.ks.ks, r.ks.critical_1pct);
    }
    let line = run.header.line();
    let csv = run.path("moments.csv");
    write_csv(report, &line, &csv)?;
    let json = run.path("report.json");
    write_json(report, &run.header, &json)?;

    let rows: Vec<Vec<String>> = exp
        .n_values
        .iter()
        .zip(&out.samples)
        .flat_map(|(n, s)| s.iter().enumerate().map(move |(i, v)| vec![n.to_string(), i.to_string(), v.to_string()]))
        .collect();
    let samples = run.path("samples.csv");
    write_samples_csv(&samples, &run.header, &["n", "index", "value"], &rows)?;
    Ok(())
}

pub fn limit_sample(cfg: &RunConfig, run: &mut Run) -> Result<(), CliError> {
    let exp = &cfg.experiment;
    check_regime(&exp.params)?;
    let c = limit_constants(exp)?;
    let s = sample_limit_law_with(exp, &c, exp.limit_draws)?;
    log::info!("{} limit-law draws at epsilon = {}", s.values.len(), s.epsilon);
    let rows: Vec<Vec<String>> = s
        .values
        .iter()
        .zip(&s.alphas)
        .enumerate()
        .map(|(i, (v, a))| vec![i.to_string(), a.to_string(), v.to_string()])
        .collect();
    let path = run.path("limit_samples.csv");
    write_samples_csv(&path, &run.header, &["index", "alpha", "value"], &rows)?;
    Ok(())
}

/// Reads one numeric column of a CSV file, skipping `#` lines.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .clone();
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::Input(format!("{}: no column '{column}'", path.display())))?;
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let field = rec.get(idx).unwrap_or("");
            field
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("{}: row {}: '{field}' is not a number", path.display(), i + 1)))
        })
        .collect()
}

#[derive(Serialize)]
struct SampleSummary {
    path: String,
    count: usize,
    moments: Vec<MomentEstimate>,
}

#[derive(Serialize)]
struct CompareDoc {
    column: String,
    a: SampleSummary,
    b: SampleSummary,
    ks: KsResult,
}

pub fn compare_hash(a: &Path, b: &Path, column: &str) -> Result<String, CliError> {
    let mut bytes = fs::read(a)?;
    bytes.push(0);
    bytes.extend(fs::read(b)?);
    bytes.push(0);
    bytes.extend(column.as_bytes());
    Ok(hex_digest(&bytes))
}

pub fn compare(a: &Path, b: &Path, column: &str, run: &mut Run) -> Result<(), CliError> {
    let summary = |path: &Path| -> Result<(Vec<f64>, SampleSummary), CliError> {
        let x = read_column(path, column)?;
        let moments = (1..=MAX_ORDER)
            .map(|p| empirical_moment(&x, p))
            .collect::<Result<Vec<_>, _>>()?;
        let s = SampleSummary {
            path: path.display().to_string(),
            count: x.len(),
            moments,
        };
        Ok((x, s))
    };
    let (xa, sa) = summary(a)?;
    let (xb, sb) = summary(b)?;
    let ks = two_sample_compare(&xa, &xb)?;
    log::info!("KS {:.5}, 1% critical {:.5}, same law not rejected: {}", ks.ks, ks.critical_1pct, ks.decision);
    run.write_json(
        "compare.json",
        &CompareDoc {
            column: column.to_string(),
            a: sa,
            b: sb,
            ks,
        },
    )?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, value: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
            detail,
        }
    }

    fn failed(name: &str, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            tolerance,
            passed: false,
            detail,
        }
    }
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    hurst: f64,
    dimension: usize,
    passed: bool,
    checks: &'a [Check],
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn lemma_a1_checks(p: &ModelParams, spec: &QuadratureSpec) -> Result<Vec<Check>, CliError> {
    let pairs = [(1.0, 1.0), (4.0, 4.0), (1.0, 1e3), (1.0, 1e6), (1e3, 1.0), (2e3, 1.0)];
    let rep = verify_lemma_a1(p.hurst, p.dim, &pairs, spec)?;
    let r: Vec<f64> = rep.points.iter().map(|x| x.ratio).collect();
    Ok(vec![
        Check::new(
            "lemma_a1_diagonal_scaling",
            rel_diff(r[1], r[0]),
            1e-6,
            format!("R(4,4) = {}, R(1,1) = {}", r[1], r[0]),
        ),
        Check::new(
            "lemma_a1_saturation",
            rel_diff(r[3], r[2]),
            0.05,
            format!("R(1,1e6) = {}, R(1,1e3) = {}", r[3], r[2]),
        ),
        Check::new(
            "lemma_a1_shorter_side",
            rel_diff(r[5], r[4]),
            0.01,
            format!("R(2000,1) = {}, R(1000,1) = {}", r[5], r[4]),
        ),
    ])
}

fn lemma_a2_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let exp = &cfg.experiment;
    let p = &exp.params;
    let unit = |len: f64| {
        let mut y = vec![0.0; p.dim];
        y[0] = len;
        y
    };
    let cases = [(1.0, unit(1.0)), (4.0, unit(1.0)), (1.0, unit(5.0))];
    let reports = cases
        .iter()
        .enumerate()
        .map(|(i, (n, y))| {
            let mut rng = StreamKey::new(exp.master_seed, Purpose::Lemma, 2, i as u64).stream();
            verify_lemma_a2(p.hurst, p.dim, y, *n, cfg.verify.lemma_draws, &exp.quadrature, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let compare = |name: &str, a: usize, b: usize| {
        let (ra, rb) = (&reports[a], &reports[b]);
        let se = (ra.ratio_se.powi(2) + rb.ratio_se.powi(2)).sqrt();
        Check::new(
            name,
            (ra.ratio - rb.ratio).abs() / se,
            3.0,
            format!(
                "ratio(n={}, |y|={}) = {} +- {}, ratio(n={}, |y|={}) = {} +- {}; value in combined SEs",
                ra.n, ra.y_norm, ra.ratio, ra.ratio_se, rb.n, rb.y_norm, rb.ratio, rb.ratio_se
            ),
        )
    };
    Ok(vec![compare("lemma_a2_n_invariance", 0, 1), compare("lemma_a2_y_invariance", 0, 2)])
}

fn lnd_check(cfg: &RunConfig) -> Result<Check, CliError> {
    let exp = &cfg.experiment;
    let mut rng = StreamKey::new(exp.master_seed, Purpose::Lnd, 0, 0).stream();
    let rep = lnd_diagnostic(exp.params.hurst, cfg.verify.lnd_segments, cfg.verify.trials, &mut rng)?;
    let ok = rep.ratio_min > 0.0 && rep.ratio_min.is_finite() && rep.ratio_max.is_finite();
    Ok(Check {
        name: "local_nondeterminism".into(),
        value: rep.ratio_min,
        tolerance: 0.0,
        passed: ok,
        detail: format!(
            "ratio range [{}, {}] over {} configurations of {} segments; passes when finite and bounded away from 0",
            rep.ratio_min, rep.ratio_max, rep.trials, cfg.verify.lnd_segments
        ),
    })
}

fn beta_norm_check(cfg: &RunConfig) -> Result<Check, CliError> {
    let exp = &cfg.experiment;
    let beta = cfg.verify.beta.unwrap_or_else(|| exp.params.beta());
    let f = exp.test_function()?;
    let tol = cfg.verify.beta_norm_tol;
    let quad = exp.quadrature.rel_tol;
    let name = "beta_norm_cross_check";
    Ok(match (beta_norm_direct(&f, beta, quad), beta_norm_fourier(&f, beta, quad)) {
        (Ok(direct), Ok(fourier)) => Check::new(
            name,
            rel_diff(direct, fourier),
            tol,
            format!("beta = {beta}: direct {direct}, Fourier {fourier}"),
        ),
        (Err(e), _) | (_, Err(e)) => Check::failed(name, tol, format!("beta = {beta}: {e}")),
    })
}

/// Runs every check and returns how many failed.
pub fn verify(cfg: &RunConfig, run: &mut Run) -> Result<usize, CliError> {
    let p = cfg.experiment.params;
    check_regime(&p)?;
    let mut checks = lemma_a1_checks(&p, &cfg.experiment.quadrature)?;
    checks.extend(lemma_a2_checks(cfg)?);
    checks.push(lnd_check(cfg)?);
    checks.push(beta_norm_check(cfg)?);
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        log::info!("{status} {}: {} (tolerance {}) {}", c.name, c.value, c.tolerance, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    run.write_json(
        "verify.json",
        &VerifyDoc {
            hurst: p.hurst,
            dimension: p.dim,
            passed: failed == 0,
            checks: &checks,
        },
    )?;
    Ok(failed)
}
