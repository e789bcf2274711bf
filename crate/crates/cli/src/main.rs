mod commands;
mod config;
mod error;

use std::io::{IsTerminal, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Format, SweepParam};
use config::Config;
use error::{CliError, CliResult};

/// Photon-Carnot engine: micromaser steady states and cycle thermodynamics.
#[derive(Debug, Parser)]
#[command(name = "pce", version)]
struct Cli {
    /// JSON config file; `-` or omitted reads stdin.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a config field by dotted path, e.g. `hot.prep.p_e=0.25`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Steady-state residual tolerance, relative to the generator scale.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stationary field of the master equation next to the rate-equation value.
    SteadyState {
        /// Also write the stationary density matrix as JSON.
        #[arg(long, value_name = "PATH")]
        dump_state: Option<PathBuf>,
    },
    /// Corners, heats and efficiency of one cycle.
    Cycle,
    /// Cycle evaluated over a grid of one parameter.
    Sweep {
        #[arg(long, value_enum)]
        param: Option<SweepParam>,
        /// Comma-separated grid; overrides `sweep.grid`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<String>>,
    },
    /// Temperature-entropy samples along the four strokes.
    TsDiagram {
        #[arg(long)]
        points: Option<usize>,
    },
    /// Loss versus coherence at the quoted bounds of each hardware platform.
    Feasibility {
        /// optical, microwave, circuit; all when omitted.
        platforms: Vec<String>,
    },
}

fn read_config(cli: &Cli) -> CliResult<Config> {
    let text = match cli.config.as_deref() {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| CliError::io(format!("cannot read config {}", p.display()), e))?,
        _ => {
            let stdin = std::io::stdin();
            if cli.config.is_none() && stdin.is_terminal() {
                return Err(CliError::usage(
                    "no config given (use --config PATH or pipe JSON on stdin)",
                ));
            }
            let mut s = String::new();
            stdin
                .lock()
                .read_to_string(&mut s)
                .map_err(|e| CliError::io("cannot read config from stdin", e))?;
            s
        }
    };
    config::load(&text, &cli.sets)
}

fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var("PCE_NUM_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| {
                CliError::usage(format!(
                    "PCE_NUM_THREADS must be a positive integer, got {v:?}"
                ))
            }),
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> CliResult<String> {
    let fmt = |default| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Feasibility { platforms } => {
            commands::feasibility(platforms, &cli.sets, fmt(Format::Json))
        }
        Command::SteadyState { dump_state } => {
            let cfg = read_config(cli)?;
            commands::steady_state(&cfg, cli.tol, fmt(Format::Json), dump_state.as_deref())
        }
        Command::Cycle => commands::cycle(&read_config(cli)?, fmt(Format::Json)),
        Command::Sweep { param, grid } => {
            let threads = thread_cap()?;
            commands::sweep(
                &read_config(cli)?,
                *param,
                grid.clone(),
                threads,
                fmt(Format::Csv),
            )
        }
        Command::TsDiagram { points } => {
            commands::ts(&read_config(cli)?, *points, fmt(Format::Csv))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(path) => commands::write_file(path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("cannot write to stdout", e)),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
