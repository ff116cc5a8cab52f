use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "modpde", version, about = "Modulated dispersive PDE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `run.out`; default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the library's parallel loops.
    #[arg(long, global = true, env = "MODPDE_THREADS")]
    threads: Option<usize>,

    /// Replaces `run.seed`.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve once and write the trajectory and a conservation audit.
    Simulate,
    /// Convergence study of one or more schemes against a reference.
    Converge,
    /// Fitted decay exponent and norm estimate over a path ensemble.
    Irregularity,
    /// Empirical operator bounds over dyadic interval lengths.
    Probe,
    /// Which hypotheses hold for the configured parameters.
    Regime,
}

/// Anything that ends a command early, with its exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    NonConvergence(String),
    Thresholds(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 1,
            Self::NonConvergence(_) => 2,
            Self::Thresholds(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::NonConvergence(m) | Self::Thresholds(m) => m,
        }
    }
}

impl From<modpde::Error> for Failure {
    fn from(e: modpde::Error) -> Self {
        match e {
            modpde::Error::NonConvergence { .. } => Self::NonConvergence(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let Some(path) = &cli.config else {
        return Err(Failure::Config("--config <path> is required".into()));
    };
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed_override {
        cfg.run.seed = seed;
    }
    let out = cli.out.clone().or_else(|| cfg.run.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Simulate => commands::simulate(&cfg, &out),
        Command::Converge => commands::converge(&cfg, &out),
        Command::Irregularity => commands::irregularity(&cfg, &out),
        Command::Probe => commands::probe(&cfg, &out),
        Command::Regime => commands::regime(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("modpde: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
