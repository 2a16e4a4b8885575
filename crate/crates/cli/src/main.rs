use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use srwpnet_cli::config::Units;
use srwpnet_cli::{cmd_density, cmd_rate, cmd_simulate, cmd_validate, CliError, ConfigError, Outcome, RunConfig};

#[derive(Parser)]
#[command(
    name = "srwpnet",
    version,
    about = "Interference and rate of mobile drone cellular networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interferer density profiles under UDM.
    Density(Common),
    /// Average rate curves under UIM and UDM.
    Rate(Common),
    /// Raw per-realization SIR samples.
    Simulate(Common),
    /// Run the statistical and numerical invariant suites.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `sim.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Add Monte Carlo columns.
    #[arg(long)]
    mc: bool,
    #[arg(long)]
    units: Option<Units>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key, e.g. `--set network.h=150`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn load(c: &Common) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(&c.config).map_err(|e| ConfigError {
        line: None,
        message: format!("cannot read {}: {e}", c.config.display()),
    })?;
    let mut overrides = c.set.clone();
    if let Some(seed) = c.seed {
        overrides.push(format!("sim.seed={seed}"));
    }
    if let Some(units) = c.units {
        overrides.push(format!("run.units={}", units.name()));
    }
    Ok(RunConfig::parse_with_overrides(&text, &overrides)?)
}

type Handler = fn(&RunConfig, bool) -> Result<Outcome, CliError>;

fn run(cli: Cli) -> Result<(Outcome, Option<PathBuf>), CliError> {
    let (common, f): (&Common, Handler) = match &cli.command {
        Command::Density(c) => (c, cmd_density),
        Command::Rate(c) => (c, cmd_rate),
        Command::Simulate(c) => (c, |cfg, _| cmd_simulate(cfg)),
        Command::Validate(c) => (c, |cfg, _| cmd_validate(cfg)),
    };
    let cfg = load(common)?;
    let out = common.out.clone().or_else(|| cfg.run.out.clone());
    Ok((f(&cfg, common.mc)?, out))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((outcome, out)) => {
            let written = match out {
                Some(path) => fs::write(&path, &outcome.output).map_err(|e| format!("{}: {e}", path.display())),
                None => std::io::stdout().write_all(&outcome.output).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(3);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("validation failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
