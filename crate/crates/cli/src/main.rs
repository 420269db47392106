//! `nonbloch`: spectra, generalized Brillouin zones, Wannier-Stark ladders
//! and wave-packet dynamics of driven non-Hermitian binary lattices.
//!
//! Exit status is 0 on success, 2 for bad input (including an empty GBZ
//! window) and 3 for numerical failures.

mod commands;
mod config;
mod csvout;
mod error;
mod presets;
mod svg;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonbloch::config::ConfigDoc;

use crate::commands::{execute, Outputs};
use crate::config::{Command, RunConfig};
use crate::error::{CliError, Context};

#[derive(Debug, Parser)]
#[command(
    name = "nonbloch",
    version,
    about = "Driven non-Hermitian lattices: spectra, ladders and dynamics"
)]
struct Cli {
    /// Run document (`section.key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Periodic bands E±(k).
    Bands,
    /// Generalized Brillouin zone and non-Bloch energies.
    Gbz,
    /// Open-chain spectrum with skin metrics.
    Obc,
    /// Monodromy angle and eigenvector overlap for a list of forces.
    Ws,
    /// Wave-packet dynamics on the driven lattice.
    Evolve,
    /// Wannier-Stark quantities along a force or delta axis.
    Sweep,
    /// Run a built-in figure-reproduction document; `--config` keys override it.
    Preset {
        /// fig1, fig1b, fig2a, fig2b, fig2c, fig3a, fig3b, fig5 or fig6.
        name: String,
    },
}

fn read_doc(path: &PathBuf) -> Result<ConfigDoc, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.clone(),
        message: e.to_string(),
    })?;
    ConfigDoc::parse(&text).context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let user = cli.config.as_ref().map(read_doc).transpose()?;
    let (doc, direct) = match &cli.command {
        Cmd::Preset { name } => {
            let text = presets::lookup(name).ok_or_else(|| CliError::UnknownPreset(name.clone(), presets::names()))?;
            let mut doc = ConfigDoc::parse(text).context(|| format!("preset {name}"))?;
            if let Some(user) = user {
                doc.overlay(user);
            }
            (doc, None)
        }
        other => {
            let cmd = match other {
                Cmd::Bands => Command::Bands,
                Cmd::Gbz => Command::Gbz,
                Cmd::Obc => Command::Obc,
                Cmd::Ws => Command::Ws,
                Cmd::Evolve => Command::Evolve,
                Cmd::Sweep => Command::Sweep,
                Cmd::Preset { .. } => unreachable!(),
            };
            let doc = user.ok_or_else(|| CliError::Usage("this command needs --config PATH".into()))?;
            (doc, Some(cmd))
        }
    };
    let cfg = RunConfig::from_doc(doc).context(|| "invalid run configuration".into())?;
    let commands = match direct {
        Some(cmd) => vec![cmd],
        None => cfg.run.clone(),
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let mut out = Outputs::new(dir, cli.svg)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", cli.jobs.unwrap_or(0))))?;
    pool.install(|| execute(&cfg, &commands, &mut out))?;
    Ok(out.written)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
