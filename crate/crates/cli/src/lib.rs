//! Command-line driver for the adaptive cooking-game robot.
//!
//! [`run`] takes the argument list and the three standard streams, so the
//! binary and the tests share one code path.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use sar_adapt::config::{Experiment, ExperimentConfig};
use sar_adapt::mdp::RobotAction;
use sar_adapt::qlearning::QTable;

mod play;
mod simulate;
mod train;
mod verify;

pub use play::{run_play, LiveOperator};

pub const EXIT_OK: i32 = 0;
/// Bad arguments, invalid configuration, unreadable or unwritable files.
pub const EXIT_INVALID: i32 = 1;
/// `verify` ran but agreement fell below the threshold.
pub const EXIT_THRESHOLD: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sar-adapt", version, about = "Train, verify, simulate and play the adaptive cooking game")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a Q-table and write qtable.csv and metrics.csv.
    Train(CommonArgs),
    /// Compare a trained Q-table with the exact optimal policy.
    Verify(VerifyArgs),
    /// Evaluate a policy over simulated sessions.
    Simulate(SimulateArgs),
    /// Play one session from the terminal, entering the user's state by hand.
    Play(PlayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Experiment config (TOML). Built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// User model file; overrides the config.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Q-table to check; defaults to <out>/qtable.csv.
    #[arg(long)]
    pub qtable: Option<PathBuf>,
    /// Minimum agreement in percent.
    #[arg(long, default_value_t = 90.0)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub qtable: Option<PathBuf>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub episodes: u64,
    /// Evaluate a constant action (a0, a1 or a2) instead of the Q-table.
    #[arg(long, value_parser = parse_action)]
    pub baseline: Option<RobotAction>,
}

#[derive(Debug, Clone, Args)]
pub struct PlayArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub qtable: Option<PathBuf>,
    /// Drive the robot with a constant action instead of the Q-table.
    #[arg(long, value_parser = parse_action)]
    pub baseline: Option<RobotAction>,
}

fn parse_action(s: &str) -> Result<RobotAction, String> {
    RobotAction::from_short_id(s).ok_or_else(|| format!("expected a0, a1 or a2, got {s:?}"))
}

/// Parses `args` (program name first) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Train(a) => train::run(&a, out),
        Command::Verify(a) => verify::run(&a, out),
        Command::Simulate(a) => simulate::run(&a, out),
        Command::Play(a) => play::run(&a, input, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INVALID
        }
    }
}

fn require_file(path: &Path) -> anyhow::Result<()> {
    if !path.is_file() {
        bail!("file not found: {}", path.display());
    }
    Ok(())
}

/// Loads the config, applies command-line overrides and validates every
/// referenced file.
pub fn load_experiment(args: &CommonArgs) -> anyhow::Result<Experiment> {
    let mut cfg = match &args.config {
        Some(path) => {
            require_file(path)?;
            ExperimentConfig::from_path(path)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(model) = &args.model {
        cfg.model = Some(model.clone());
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    for path in [&cfg.model, &cfg.recipe, &cfg.behavior].into_iter().flatten() {
        require_file(path)?;
    }
    Ok(cfg.load()?)
}

fn qtable_path(explicit: &Option<PathBuf>, exp: &Experiment) -> PathBuf {
    explicit.clone().unwrap_or_else(|| exp.config.out_dir.join("qtable.csv"))
}

fn load_qtable(path: &Path) -> anyhow::Result<QTable> {
    require_file(path)?;
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    QTable::read_csv(file).with_context(|| format!("reading {}", path.display()))
}

fn create_out_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}
