//! `dlibor`: batch runner for the discrete LIBOR market model engine.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use discrete_libor::run::{
    convergence_csv, emit_convergence_output, emit_smile_outputs, run_converge, run_price,
    smile_csv, smile_table, write_file, RunOverrides,
};
use discrete_libor::{Error, ModelChoice, Result, RunConfig};

#[derive(Parser)]
#[command(
    name = "dlibor",
    version,
    about = "Discrete-time LIBOR market models: caplet smiles and convergence experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price the configured caplet strike grid and print the table.
    Price(SmileArgs),
    /// Build the smile and write the configured CSV outputs.
    Smile(SmileArgs),
    /// Run the grid-refinement experiment and emit its report.
    Converge(ConvergeArgs),
    /// Check a config file and print its hash.
    Validate {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct SmileArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured model (bernoulli-exact | lognormal-mc | gz-mc).
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelChoice>,
    /// Override the Monte Carlo path count.
    #[arg(long)]
    paths: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the smile CSV here (in addition to configured outputs).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated refinement levels, e.g. `4,16,64`.
    #[arg(long, value_parser = parse_levels)]
    levels: Option<Levels>,
    /// Override paths per seed (Monte Carlo) or the path cap (exact mode).
    #[arg(long)]
    paths: Option<usize>,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report CSV here (in addition to configured outputs).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone)]
struct Levels(Vec<usize>);

fn parse_model(s: &str) -> std::result::Result<ModelChoice, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_levels(s: &str) -> std::result::Result<Levels, String> {
    let levels = s
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad level '{part}': {e}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if levels.is_empty() {
        return Err("need at least one level".into());
    }
    Ok(Levels(levels))
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

fn warn_on_driver_moments(config: &RunConfig) {
    if let Ok(driver) = config.driver_spec() {
        for warning in driver.moment_warnings() {
            eprintln!("warning: {warning}");
        }
    }
}

fn cmd_price(args: &SmileArgs, write_outputs: bool) -> Result<()> {
    let config = load_config(&args.config)?;
    warn_on_driver_moments(&config);
    let overrides = RunOverrides {
        model: args.model,
        paths: args.paths,
        seed: args.seed,
        levels: None,
    };
    let run = run_price(&config, &overrides)?;
    print!("{}", smile_table(&run));
    let mut written = Vec::new();
    if write_outputs {
        written.extend(emit_smile_outputs(&config, &run)?);
    }
    if let Some(out) = &args.out {
        write_file(out, &smile_csv(&run))?;
        written.push(out.clone());
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_converge(args: &ConvergeArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    let overrides = RunOverrides {
        model: None,
        paths: args.paths,
        seed: args.seed,
        levels: args.levels.clone().map(|l| l.0),
    };
    let run = run_converge(&config, &overrides)?;
    print!("{}", convergence_csv(&run));
    let mut written = emit_convergence_output(&config, &run)?;
    if let Some(out) = &args.out {
        write_file(out, &convergence_csv(&run))?;
        written.push(out.clone());
    }
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<()> {
    let config = load_config(path)?;
    warn_on_driver_moments(&config);
    println!("ok: config_sha256={}", config.hash());
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Price(args) => cmd_price(args, false),
        Command::Smile(args) => cmd_price(args, true),
        Command::Converge(args) => cmd_converge(args),
        Command::Validate { config } => cmd_validate(config),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
