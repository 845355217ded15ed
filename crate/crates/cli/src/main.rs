//! `nlscyl` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure
//! (partial results are still written), 4 complexity guard tripped.

mod commands;
mod config;
mod outdir;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlscyl::error::{Error, Result};
use outdir::OutDir;

#[derive(Parser)]
#[command(
    name = "nlscyl",
    version,
    about = "Pseudospectral cubic NLS on the cylinder: simulation and estimate laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Run configuration file (JSON)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (overrides the config's output.directory)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// RNG seed (overrides the config's seed)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel sections
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Emit SVG plots alongside the CSVs
    #[arg(long, global = true)]
    plots: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the equation and record diagnostics
    Simulate,
    /// Run the bilinear-estimate scaling sweeps
    VerifyBilinear,
    /// Measure the modified-energy increment over one local window per N
    EnergyIncrement,
    /// Monte Carlo sampling of the symbol inequalities
    SymbolSample,
    /// Long-horizon Sobolev growth exponent (observational)
    GrowthStudy,
    /// Re-render plots and an index from an existing output directory
    Report,
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        // ignore the error if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::config("--config", "a configuration file is required"))?;
    let mut cfg = config::load(config_path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.plots {
        cfg.output.plots = true;
    }
    let out_path = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    cfg.output.directory = out_path.display().to_string();
    let out = match cli.command {
        Cmd::Report => OutDir::open_existing(&out_path)?,
        _ => OutDir::create(&out_path)?,
    };
    match cli.command {
        Cmd::Simulate => commands::simulate(&cfg, &out),
        Cmd::VerifyBilinear => commands::verify_bilinear(&cfg, &out),
        Cmd::EnergyIncrement => commands::energy_increment(&cfg, &out),
        Cmd::SymbolSample => commands::symbol_sample(&cfg, &out),
        Cmd::GrowthStudy => commands::growth_study(&cfg, &out),
        Cmd::Report => commands::report(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
