//! `sigmal`: runs the validation suites and Greek experiments and writes CSV.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Config, ConfigError, Overrides};

#[derive(Parser, Debug)]
#[command(name = "sigmal", version, about = "Signature Malliavin Greeks: validation suites and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Algebraic identities and worked examples.
    ValidateAlgebra(Common),
    /// Stratonovich identity, derivative and chaos checks.
    ValidateMalliavin(Common),
    /// Monte Carlo expected signature against the closed form.
    EsigCheck(Common),
    /// OU semigroup operator against nested Monte Carlo.
    OuCheck(Common),
    /// European call and digital deltas with convergence checkpoints.
    GreeksConvergence(Common),
    /// Asian call and digital deltas with convergence checkpoints.
    AsianConvergence(Common),
    /// Distribution of the weight denominators plus the matching call deltas.
    InstabilityHistogram(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Key-value experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for CSV output.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    /// Time steps per unit time (finest grid for validate-malliavin).
    #[arg(long)]
    steps: Option<usize>,
    /// Signature truncation level.
    #[arg(long)]
    level: Option<usize>,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (common, needs_model) = match &cli.command {
        Command::ValidateAlgebra(c) | Command::ValidateMalliavin(c) | Command::EsigCheck(c) | Command::OuCheck(c) => (c, false),
        Command::GreeksConvergence(c) | Command::AsianConvergence(c) | Command::InstabilityHistogram(c) => (c, true),
    };
    let config = match &common.config {
        Some(p) => Config::load(p)?,
        None if needs_model => return Err(ConfigError("this command needs --config with a model".into()).into()),
        None => Config::default(),
    };
    std::fs::create_dir_all(&common.out)?;
    let ctx = commands::Context {
        config,
        overrides: Overrides { seed: common.seed, paths: common.paths, steps: common.steps, level: common.level },
        out: common.out.clone(),
    };
    match cli.command {
        Command::ValidateAlgebra(_) => commands::validate_algebra(&ctx),
        Command::ValidateMalliavin(_) => commands::validate_malliavin(&ctx),
        Command::EsigCheck(_) => commands::esig_check(&ctx),
        Command::OuCheck(_) => commands::ou_check(&ctx),
        Command::GreeksConvergence(_) => commands::greeks_convergence(&ctx),
        Command::AsianConvergence(_) => commands::asian_convergence(&ctx),
        Command::InstabilityHistogram(_) => commands::instability_histogram(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<ConfigError>() => {
            log::error!("config: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(1)
        }
    }
}
