use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qrobot_core::gridworld::{parse_map, DEFAULT_MAP};
use qrobot_harness::commands::{self, EXPECTED_PATH_LENGTH};
use qrobot_harness::{config, Result};

#[derive(Parser)]
#[command(name = "qrobot", version, about = "Grover search, planning and quantum-inspired RL experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Grover search for one marked item and report success rates.
    Grover {
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 0)]
        target: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-trial CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print the analytic failure-bound report for n = 2..=16.
        #[arg(long)]
        bounds: bool,
    },
    /// Print the classical vs quantum complexity table.
    Table1,
    /// Solve an MDP by value iteration and pick actions by Grover search.
    Plan {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a map and report its shortest start-goal distance.
    MapCheck {
        /// Map file; the built-in map when omitted.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = EXPECTED_PATH_LENGTH)]
        expect: usize,
    },
    /// Train one agent and write its per-episode log.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one agent per (alpha, seed) pair and write a combined log.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        alphas: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Grover {
            qubits,
            target,
            trials,
            seed,
            out: csv,
            bounds,
        } => {
            commands::cmd_grover(qubits, target, trials, seed, csv.as_deref(), out)?;
            if bounds {
                writeln!(out)?;
                out.write_all(commands::render_failure_report(&commands::failure_bounds(2..=16)).as_bytes())?;
            }
        }
        Command::Table1 => commands::cmd_table1(out)?,
        Command::Plan {
            mdp,
            tol,
            seed,
            out: csv,
        } => {
            commands::cmd_plan(&mdp, tol, seed, csv.as_deref(), out)?;
        }
        Command::MapCheck { map, expect } => {
            let map = match map {
                Some(path) => config::load_map(&path)?,
                None => parse_map(DEFAULT_MAP)?,
            };
            commands::cmd_map_check(&map, expect, out)?;
        }
        Command::Train { config, seed, out: csv } => {
            commands::cmd_train(&config, seed, &csv, out)?;
        }
        Command::Sweep {
            config,
            alphas,
            seeds,
            out: csv,
        } => {
            commands::cmd_sweep(&config, &alphas, &seeds, &csv, out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(cli.command, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
