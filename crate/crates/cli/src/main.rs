//! `fbm-ilt`: constants, simulations and checks for occupation functionals
//! of two independent fractional Brownian motions.

mod commands;
mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::commands::Run;
use crate::config::{ConfigError, RunConfig};

const DEFAULT_OUT: &str = "results";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error(transparent)]
    Core(#[from] fbm_ilt::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0} verification check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(fbm_ilt::Error::Regime { .. }) => 2,
            CliError::ChecksFailed(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "fbm-ilt", version, about = "Occupation functionals of fractional Brownian motion")]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = "FBM_ILT_THREADS")]
    threads: Option<usize>,

    /// Output directory, created when missing. Overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Master seed, overriding the `seed` entry of the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Limit-law constants and predicted moments (constants.json).
    Constants(ConfigArgs),
    /// Replicated simulation of F_n against the predicted limit law.
    Simulate(ConfigArgs),
    /// Draws from the predicted mixed normal limit law.
    LimitSample(ConfigArgs),
    /// Two-sample comparison of sample columns from two CSV files.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "value")]
        column: String,
    },
    /// Numerical checks of the integral bounds, local nondeterminism and
    /// the energy norm. Exits with status 3 when a check fails.
    Verify(ConfigArgs),
}

fn load(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Config {
        path: args.config.clone(),
        source: ConfigError::Syntax {
            line: 0,
            message: format!("cannot read file: {e}"),
        },
    })?;
    let mut cfg = RunConfig::parse(&text).map_err(|source| CliError::Config {
        path: args.config.clone(),
        source,
    })?;
    if let Some(seed) = args.seed {
        cfg.experiment.master_seed = seed;
    }
    Ok(cfg)
}

fn out_dir(cli_out: &Option<PathBuf>, cfg: Option<&RunConfig>) -> PathBuf {
    cli_out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| Path::new(DEFAULT_OUT).to_path_buf())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    let (name, outcome) = match &cli.command {
        Command::Compare { a, b, column } => {
            let hash = commands::compare_hash(a, b, column)?;
            let mut r = Run::start(out_dir(&cli.out, None), &hash)?;
            ("compare", commands::compare(a, b, column, &mut r).map(|_| (r, 0)))
        }
        Command::Constants(args)
        | Command::Simulate(args)
        | Command::LimitSample(args)
        | Command::Verify(args) => {
            let cfg = load(args)?;
            log::info!("configuration hash {}", cfg.hash());
            let mut r = Run::start(out_dir(&cli.out, Some(&cfg)), &cfg.hash())?;
            match &cli.command {
                Command::Constants(_) => ("constants", commands::constants(&cfg, &mut r).map(|_| (r, 0))),
                Command::Simulate(_) => ("simulate", commands::simulate(&cfg, &mut r).map(|_| (r, 0))),
                Command::LimitSample(_) => ("limit-sample", commands::limit_sample(&cfg, &mut r).map(|_| (r, 0))),
                _ => ("verify", commands::verify(&cfg, &mut r).map(|f| (r, f))),
            }
        }
    };
    let (r, failed) = outcome?;
    r.finish(name)?;
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
