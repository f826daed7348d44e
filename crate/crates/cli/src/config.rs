//! Plain-text run configuration.
//!
//! One `key = value [unit]` entry per line. `#` starts a comment, lists are
//! comma separated, and the unit in brackets is optional but must match the
//! key when given. `hurst`, `dimension`, `t1` and `t2` have no defaults.
//!
//! ```text
//! hurst = 0.75
//! dimension = 2
//! t1 = 1 [s]
//! t2 = 1 [s]
//! n_values = 16, 64
//! replications = 10000
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use fbm_ilt::montecarlo::ExperimentConfig;
use fbm_ilt::qmc::QmcBudget;
use fbm_ilt::{ModelParams, QuadratureSpec, SamplerKind, Substitution};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("key '{key}': {message}")]
    Value { key: String, message: String },
}

/// Settings of the `verify` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifySettings {
    /// Random configurations drawn by the nondeterminism diagnostic.
    pub trials: usize,
    pub lnd_segments: usize,
    /// Monte Carlo draws per point of the second appendix bound.
    pub lemma_draws: usize,
    /// Exponent for the norm cross-check; the model exponent when unset.
    pub beta: Option<f64>,
    pub beta_norm_tol: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            trials: 1000,
            lnd_segments: 4,
            lemma_draws: 20_000,
            beta: None,
            beta_norm_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub output_dir: Option<PathBuf>,
    pub verify: VerifySettings,
}

const TIME_UNITS: &[&str] = &["1", "s"];
const PLAIN: &[&str] = &["1"];

/// Every accepted key with the units it may carry.
const KEYS: &[(&str, &[&str])] = &[
    ("hurst", PLAIN),
    ("dimension", PLAIN),
    ("t1", TIME_UNITS),
    ("t2", TIME_UNITS),
    ("test_function", &[]),
    ("test_function_table", &[]),
    ("n_values", PLAIN),
    ("replications", PLAIN),
    ("seed", &[]),
    ("kappa", PLAIN),
    ("epsilon_schedule", PLAIN),
    ("limit_draws", PLAIN),
    ("sampler", &[]),
    ("rel_tol", PLAIN),
    ("abs_tol", PLAIN),
    ("max_subdivisions", PLAIN),
    ("substitution", &[]),
    ("qmc_points", PLAIN),
    ("qmc_replicates", PLAIN),
    ("output_dir", &[]),
    ("trials", PLAIN),
    ("lnd_segments", PLAIN),
    ("lemma_draws", PLAIN),
    ("beta", PLAIN),
    ("beta_norm_tol", PLAIN),
];

/// Raw entries, keyed by name, with their source line.
struct Entries(BTreeMap<String, (usize, String)>);

fn split_unit(raw: &str) -> (&str, Option<&str>) {
    let raw = raw.trim();
    if let Some(body) = raw.strip_suffix(']') {
        if let Some(open) = body.rfind('[') {
            return (body[..open].trim(), Some(body[open + 1..].trim()));
        }
    }
    (raw, None)
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: line_no,
                message: format!("expected 'key = value', found '{content}'"),
            });
        };
        let key = key.trim();
        let Some((_, units)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(ConfigError::Syntax {
                line: line_no,
                message: format!("unknown key '{key}'"),
            });
        };
        let (value, unit) = split_unit(value);
        if let Some(u) = unit {
            if !units.contains(&u) {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: format!("unit [{u}] not accepted for '{key}' (allowed: {units:?})"),
                });
            }
        }
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line: line_no,
                message: format!("empty value for '{key}'"),
            });
        }
        if map.insert(key.to_string(), (line_no, value.to_string())).is_some() {
            return Err(ConfigError::Syntax {
                line: line_no,
                message: format!("duplicate key '{key}'"),
            });
        }
    }
    Ok(Entries(map))
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.0.get(key)
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e: T::Err| ConfigError::Syntax {
                line: *line,
                message: format!("cannot parse '{v}' for '{key}': {e}"),
            }),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &'static str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or(ConfigError::Missing(key))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, v)) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|item| {
                let item = item.trim();
                item.parse().map_err(|e: T::Err| ConfigError::Syntax {
                    line: *line,
                    message: format!("cannot parse '{item}' in '{key}': {e}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

fn value_error(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn parse_sampler(s: &str) -> Result<SamplerKind, ConfigError> {
    match s {
        "auto" => Ok(SamplerKind::Auto),
        "cholesky" => Ok(SamplerKind::Cholesky),
        "circulant" => Ok(SamplerKind::Circulant),
        other => Err(value_error("sampler", format!("unknown sampler '{other}'"))),
    }
}

fn parse_substitution(s: &str) -> Result<Substitution, ConfigError> {
    match s {
        "none" => Ok(Substitution::None),
        "power_2h" => Ok(Substitution::Power2H),
        "radial_polar" => Ok(Substitution::RadialPolar),
        other => Err(value_error("substitution", format!("unknown substitution '{other}'"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let e = tokenize(text)?;
        let hurst: f64 = e.require("hurst")?;
        let dim: usize = e.require("dimension")?;
        let t1: f64 = e.require("t1")?;
        let t2: f64 = e.require("t2")?;
        let params =
            ModelParams::new(hurst, dim, t1, t2).map_err(|err| value_error("hurst/dimension/t1/t2", err))?;

        let f_id = e.get::<String>("test_function")?.unwrap_or_else(|| "gaussian_difference".into());
        let mut cfg = ExperimentConfig::new(params, &f_id);
        cfg.f_table = e.get::<PathBuf>("test_function_table")?;
        if let Some(v) = e.list("n_values")? {
            cfg.n_values = v;
        }
        if let Some(v) = e.get("replications")? {
            cfg.replications = v;
        }
        if let Some(v) = e.get("seed")? {
            cfg.master_seed = v;
        }
        if let Some(v) = e.get("kappa")? {
            cfg.kappa = v;
        }
        if let Some(v) = e.list("epsilon_schedule")? {
            cfg.epsilon_schedule = v;
        }
        if let Some(v) = e.get("limit_draws")? {
            cfg.limit_draws = v;
        }
        if let Some(v) = e.get::<String>("sampler")? {
            cfg.sampler = parse_sampler(&v)?;
        }

        let mut quad = QuadratureSpec::default();
        if let Some(v) = e.get("rel_tol")? {
            quad.rel_tol = v;
        }
        if let Some(v) = e.get("abs_tol")? {
            quad.abs_tol = v;
        }
        if let Some(v) = e.get("max_subdivisions")? {
            quad.max_subdivisions = v;
        }
        if let Some(v) = e.get::<String>("substitution")? {
            quad.substitution = parse_substitution(&v)?;
        }
        cfg.quadrature = quad;

        let default_qmc = QmcBudget::default();
        let points = e.get("qmc_points")?.unwrap_or(default_qmc.points_per_replicate);
        let reps = e.get("qmc_replicates")?.unwrap_or(default_qmc.replicates);
        cfg.qmc = QmcBudget::new(points, reps).map_err(|err| value_error("qmc_points/qmc_replicates", err))?;
        cfg.validate().map_err(|err| value_error("experiment", err))?;

        let mut verify = VerifySettings::default();
        if let Some(v) = e.get("trials")? {
            verify.trials = v;
        }
        if let Some(v) = e.get("lnd_segments")? {
            verify.lnd_segments = v;
        }
        if let Some(v) = e.get("lemma_draws")? {
            verify.lemma_draws = v;
        }
        verify.beta = e.get("beta")?;
        if let Some(v) = e.get("beta_norm_tol")? {
            verify.beta_norm_tol = v;
        }
        if verify.trials == 0 {
            return Err(value_error("trials", "must be at least 1"));
        }
        if !(1..=8).contains(&verify.lnd_segments) {
            return Err(value_error("lnd_segments", "must be in 1..=8"));
        }
        if verify.lemma_draws < 2 {
            return Err(value_error("lemma_draws", "must be at least 2"));
        }
        if !(verify.beta_norm_tol > 0.0) {
            return Err(value_error("beta_norm_tol", "must be positive"));
        }

        Ok(Self {
            experiment: cfg,
            output_dir: e.get("output_dir")?,
            verify,
        })
    }

    /// Resolved configuration in a fixed key order, defaults included.
    /// Output directories are left out so that moving a run does not
    /// change its identity.
    pub fn canonical(&self) -> String {
        let c = &self.experiment;
        let p = &c.params;
        let join = |v: Vec<String>| v.join(", ");
        let mut lines = vec![
            format!("hurst = {:?}", p.hurst),
            format!("dimension = {}", p.dim),
            format!("t1 = {:?}", p.t1),
            format!("t2 = {:?}", p.t2),
            format!("test_function = {}", c.f_id),
        ];
        if let Some(t) = &c.f_table {
            lines.push(format!("test_function_table = {}", t.display()));
        }
        lines.extend([
            format!("n_values = {}", join(c.n_values.iter().map(|n| n.to_string()).collect())),
            format!("replications = {}", c.replications),
            format!("seed = {}", c.master_seed),
            format!("kappa = {:?}", c.kappa),
            format!("epsilon_schedule = {}", join(c.epsilon_schedule.iter().map(|e| format!("{e:?}")).collect())),
            format!("limit_draws = {}", c.limit_draws),
            format!("sampler = {:?}", c.sampler),
            format!("rel_tol = {:?}", c.quadrature.rel_tol),
            format!("abs_tol = {:?}", c.quadrature.abs_tol),
            format!("max_subdivisions = {}", c.quadrature.max_subdivisions),
            format!("substitution = {:?}", c.quadrature.substitution),
            format!("qmc_points = {}", c.qmc.points_per_replicate),
            format!("qmc_replicates = {}", c.qmc.replicates),
            format!("trials = {}", self.verify.trials),
            format!("lnd_segments = {}", self.verify.lnd_segments),
            format!("lemma_draws = {}", self.verify.lemma_draws),
            format!("beta = {:?}", self.verify.beta),
            format!("beta_norm_tol = {:?}", self.verify.beta_norm_tol),
        ]);
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    /// SHA-256 of [`RunConfig::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        hex_digest(self.canonical().as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "hurst = 0.75\ndimension = 2\nt1 = 1 [s]\nt2 = 1\n";

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.experiment.n_values, vec![16, 64]);
        assert_eq!(c.experiment.replications, 10_000);
        assert_eq!(c.experiment.kappa, 4.0);
        assert_eq!(c.verify, VerifySettings::default());
    }

    #[test]
    fn lists_units_and_comments() {
        let text = format!("{BASE}n_values = 8, 16 # small\nepsilon_schedule = 0.2, 0.1 [1]\nsampler = circulant\n");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.experiment.n_values, vec![8, 16]);
        assert_eq!(c.experiment.epsilon_schedule, vec![0.2, 0.1]);
        assert_eq!(c.experiment.sampler, SamplerKind::Circulant);
    }

    #[test]
    fn required_keys_have_no_default() {
        for key in ["hurst", "dimension", "t1", "t2"] {
            let text: String = BASE.lines().filter(|l| !l.starts_with(key)).map(|l| format!("{l}\n")).collect();
            assert_eq!(RunConfig::parse(&text), Err(ConfigError::Missing(key)));
        }
    }

    #[test]
    fn syntax_errors_name_the_line() {
        let err = RunConfig::parse("hurst = 0.75\ndimension 2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }), "{err}");
        let err = RunConfig::parse(&format!("{BASE}hurts = 0.5\n")).unwrap_err();
        assert!(err.to_string().contains("unknown key"));
        let err = RunConfig::parse(&format!("{BASE}kappa = 4 [s]\n")).unwrap_err();
        assert!(err.to_string().contains("unit"));
        let err = RunConfig::parse(&format!("{BASE}hurst = 0.5\n")).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err = RunConfig::parse(&format!("{BASE}replications = ten\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 5, .. }));
    }

    #[test]
    fn validation_errors() {
        for extra in ["trials = 0", "replications = 1", "kappa = 2", "n_values = 8, 4", "lnd_segments = 9"] {
            assert!(
                matches!(RunConfig::parse(&format!("{BASE}{extra}\n")), Err(ConfigError::Value { .. })),
                "{extra}"
            );
        }
    }

    #[test]
    fn hash_ignores_formatting_but_not_values() {
        let a = RunConfig::parse(BASE).unwrap();
        let b = RunConfig::parse("# comment\nt2=1.0\nt1 = 1\ndimension = 2\nhurst=0.75\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::parse(&format!("{BASE}seed = 1\n")).unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
