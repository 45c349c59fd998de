//! Command-line front end: configuration parsing, experiment orchestration
//! and CSV/plot-script serialization.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("numerical consistency failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Trajectory,
    Ensemble,
    OracleCompare,
    Unitary,
}

/// Parsed command line: subcommand plus flag overrides.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub subcommand: Subcommand,
    pub config_path: PathBuf,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub workers: usize,
}

pub const USAGE: &str = "usage: qndsim <trajectory|ensemble|oracle-compare|unitary> \
--config PATH [--seed U64] [--out DIR] [--workers INT]";

pub fn parse_args(args: &[String]) -> Result<Invocation, CliError> {
    let mut it = args.iter();
    let sub = match it.next().map(String::as_str) {
        Some("trajectory") => Subcommand::Trajectory,
        Some("ensemble") => Subcommand::Ensemble,
        Some("oracle-compare") => Subcommand::OracleCompare,
        Some("unitary") => Subcommand::Unitary,
        Some(other) => return Err(CliError::Config(format!("unknown subcommand {other:?}\n{USAGE}"))),
        None => return Err(CliError::Config(USAGE.into())),
    };
    let mut config_path = None;
    let mut seed = None;
    let mut out_dir = None;
    let mut workers = 1usize;
    while let Some(flag) = it.next() {
        let mut value = |name: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::Config(format!("flag {name} needs a value")))
        };
        match flag.as_str() {
            "--config" => config_path = Some(PathBuf::from(value("--config")?)),
            "--seed" => {
                seed = Some(value("--seed")?.parse::<u64>().map_err(|e| {
                    CliError::Config(format!("--seed must be a 64-bit unsigned integer: {e}"))
                })?)
            }
            "--out" => out_dir = Some(PathBuf::from(value("--out")?)),
            "--workers" => {
                workers = value("--workers")?.parse::<usize>().map_err(|e| {
                    CliError::Config(format!("--workers must be a positive integer: {e}"))
                })?;
                if workers == 0 {
                    return Err(CliError::Config("--workers must be at least 1".into()));
                }
            }
            other => return Err(CliError::Config(format!("unknown flag {other:?}\n{USAGE}"))),
        }
    }
    let config_path =
        config_path.ok_or_else(|| CliError::Config(format!("--config is required\n{USAGE}")))?;
    Ok(Invocation { subcommand: sub, config_path, seed, out_dir, workers })
}

/// Parses arguments, loads the configuration and dispatches. Returns the
/// process exit code: 0 success, 1 config error, 2 numerical-consistency
/// failure, 3 i/o.
pub fn run(args: &[String]) -> i32 {
    match run_inner(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(args: &[String]) -> Result<(), CliError> {
    let inv = parse_args(args)?;
    let text = std::fs::read_to_string(&inv.config_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", inv.config_path.display())))?;
    let mut cfg = config::RunConfig::parse(&text).map_err(CliError::Config)?;
    if let Some(seed) = inv.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &inv.out_dir {
        cfg.output_dir = dir.clone();
    }
    match inv.subcommand {
        Subcommand::Trajectory => commands::cmd_trajectory(&cfg),
        Subcommand::Ensemble => commands::cmd_ensemble(&cfg, inv.workers),
        Subcommand::OracleCompare => commands::cmd_oracle_compare(&cfg),
        Subcommand::Unitary => commands::cmd_unitary(&cfg),
    }
}
