use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nsk_cli::run::{run_linear_decay, run_picard, run_report, run_simulate};
use nsk_cli::validate::run_validate;
use nsk_cli::{CliResult, ExperimentConfig, RunStatus};

#[derive(Parser)]
#[command(name = "nsk", version, about = "Pseudo-spectral Navier-Stokes-Korteweg experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Oracle and property suites.
    Validate(Common),
    /// Nonlinear run with norm monitoring.
    Simulate(Common),
    /// Picard iteration distances.
    Picard(Common),
    /// Linear decay exponents and the K12 bound.
    LinearDecay(Common),
    /// Merge the JSON summaries found in the output directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn prepare(c: &Common) -> CliResult<(ExperimentConfig, PathBuf)> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &c.out {
        cfg.output.dir = out.clone();
    }
    cfg.validate()?;
    if cfg.grid.dim < 3 {
        eprintln!("warning: dim = {} is outside the hypotheses of the decay theorem", cfg.grid.dim);
    }
    if cfg.weights()?.below_regularity(cfg.grid.dim) {
        eprintln!("warning: s = {} is below floor(n/2) + 1", cfg.analysis.s);
    }
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| nsk_cli::CliError::io(dir.clone(), e))?;
    Ok((cfg, dir))
}

fn dispatch(cli: Cli) -> CliResult<RunStatus> {
    let runner = match &cli.command {
        Command::Validate(c) => (c, run_validate as fn(&ExperimentConfig, &std::path::Path) -> CliResult<RunStatus>),
        Command::Simulate(c) => (c, run_simulate as _),
        Command::Picard(c) => (c, run_picard as _),
        Command::LinearDecay(c) => (c, run_linear_decay as _),
        Command::Report { out } => return run_report(out),
    };
    let (cfg, dir) = prepare(runner.0)?;
    (runner.1)(&cfg, &dir)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(status) => {
            let command = status.summary["command"].as_str().unwrap_or("run");
            println!("{command}: {}", if status.pass { "PASS" } else { "FAIL" });
            if status.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
