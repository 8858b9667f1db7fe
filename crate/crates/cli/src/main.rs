mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::{DecideArgs, Session};
use config::{Injection, RunConfig, Stage};
use output::{sha256_hex, Sink};

/// Numerical experiments on Sturm–Liouville hypergroups.
#[derive(Debug, Parser)]
#[command(name = "hypergroup", version)]
struct Cli {
    /// TOML run configuration; built-in defaults are used when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `HYPERGROUP_OUT_DIR` and `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit with status 2 when a non-converged limit made some verdict inconclusive.
    #[arg(long, global = true)]
    strict: bool,
    /// Override one config entry, e.g. `--set spectral.taper_scale=30`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrate the Plancherel measure and write `plancherel.json`.
    Calibrate,
    /// Sample characters φ_λ.
    Eigen,
    /// Product-formula measure μ_{x,y}.
    Product,
    /// Recentred limit ν_x along the y schedule.
    Asym,
    /// ν_∞ along the x schedule.
    Limit,
    /// Strong-irregularity decision.
    Decide {
        #[arg(long, value_enum)]
        inject: Option<Injection>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Evaluation point of the injected Bessel character.
        #[arg(long)]
        x_star: Option<f64>,
    },
    /// Beurling constant and weighted admissibility.
    Weights,
    /// Left and right centres of ν_x.
    Centres,
    /// Every stage listed in `pipeline`.
    Run,
    /// Print the effective configuration as TOML.
    Config,
}

fn output_dir(cli: &Cli, config: &RunConfig) -> PathBuf {
    if let Some(dir) = &cli.out {
        return dir.clone();
    }
    if let Some(dir) = std::env::var_os("HYPERGROUP_OUT_DIR").filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    match &cli.config {
        Some(path) if config.output_dir.is_relative() => path.parent().unwrap_or(Path::new(".")).join(&config.output_dir),
        _ => config.output_dir.clone(),
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path, &cli.set)?,
        None => RunConfig::from_toml_with("", &cli.set)?,
    };
    if let Command::Config = cli.command {
        print!("{}", config.to_toml()?);
        return Ok(false);
    }
    let dir = output_dir(cli, &config);
    let sink = Sink::new(dir.clone(), sha256_hex(&serde_json::to_vec(&config)?), config.seed)?;
    let mut session = Session::new(&config, sink)?;
    let outcome = match &cli.command {
        Command::Calibrate => commands::stage(&mut session, Stage::Calibrate, &DecideArgs::default()),
        Command::Eigen => commands::stage(&mut session, Stage::Eigen, &DecideArgs::default()),
        Command::Product => commands::stage(&mut session, Stage::Product, &DecideArgs::default()),
        Command::Asym => commands::stage(&mut session, Stage::Asym, &DecideArgs::default()),
        Command::Limit => commands::stage(&mut session, Stage::Limit, &DecideArgs::default()),
        Command::Decide { inject, alpha, beta, x_star } => {
            let args = DecideArgs { inject: *inject, alpha: *alpha, beta: *beta, x_star: *x_star };
            commands::stage(&mut session, Stage::Decide, &args)
        }
        Command::Weights => commands::stage(&mut session, Stage::Weights, &DecideArgs::default()),
        Command::Centres => commands::stage(&mut session, Stage::Centres, &DecideArgs::default()),
        Command::Run => commands::run(&mut session, &dir),
        Command::Config => unreachable!("handled above"),
    }?;
    for path in session.sink.written() {
        eprintln!("wrote {}", path.display());
    }
    Ok(outcome.nonconvergent)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(nonconvergent) if nonconvergent => {
            eprintln!("warning: a limit did not converge; affected verdicts are inconclusive");
            if cli.strict {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
