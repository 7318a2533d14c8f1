use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use energy_shield_cli::commands::{self, render};
use energy_shield_cli::config::{self, AnalyzeConfig, DpConfig, ReplayConfig, SimulateConfig, SynthesizeConfig};
use energy_shield_cli::CliError;
use serde::Serialize;

/// Energy-based fairness shields: analysis, synthesis, simulation and replay.
#[derive(Parser)]
#[command(name = "energy-shield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixpoint, limit cost, burn-in and tail-bound table of a shield.
    Analyze(Common),
    /// Least invasive shield of the monotone family within a violation budget.
    Synthesize(Common),
    /// Monte Carlo ensemble of shielded streams.
    Simulate(Common),
    /// Exact finite-horizon violation measure.
    Dp(Common),
    /// Shield a recorded stream of raw decisions.
    Replay(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long)]
    threads: Option<usize>,
    /// Print the normalized configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn print_config<T: Serialize>(cfg: &T) {
    let text = serde_json::to_string_pretty(cfg).expect("config serializes");
    println!("{text}");
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Analyze(c) | Command::Synthesize(c) | Command::Simulate(c) | Command::Dp(c) | Command::Replay(c) => c,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure {n} threads: {e}")))?;
    }
    let out = common.out.as_path();
    let value = match &cli.command {
        Command::Analyze(c) => {
            let cfg: AnalyzeConfig = config::load(&c.config)?;
            if c.print_config {
                print_config(&cfg);
                return Ok(());
            }
            commands::analyze_cmd(&cfg, out)?
        }
        Command::Synthesize(c) => {
            let mut cfg: SynthesizeConfig = config::load(&c.config)?;
            if let Some(s) = c.seed {
                cfg.options.dp.seed = s;
            }
            if c.print_config {
                print_config(&cfg);
                return Ok(());
            }
            commands::synthesize_cmd(&cfg, out)?
        }
        Command::Simulate(c) => {
            let mut cfg: SimulateConfig = config::load(&c.config)?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            if c.print_config {
                print_config(&cfg);
                return Ok(());
            }
            commands::simulate_cmd(&cfg, out)?
        }
        Command::Dp(c) => {
            let mut cfg: DpConfig = config::load(&c.config)?;
            if let Some(s) = c.seed {
                cfg.options.seed = s;
            }
            if c.print_config {
                print_config(&cfg);
                return Ok(());
            }
            commands::dp_cmd(&cfg, out)?
        }
        Command::Replay(c) => {
            let mut cfg: ReplayConfig = config::load(&c.config)?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            if c.print_config {
                print_config(&cfg);
                return Ok(());
            }
            let base = c.config.parent().unwrap_or(Path::new("."));
            commands::replay_cmd(&cfg, base, out)?
        }
    };
    print!("{}", render(&value));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
