mod commands;
mod error;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::scenario::{Format, Scenario};

/// Batch runs of the squeezed LMT interferometry simulator.
///
/// Every subcommand reads the scenario file (all sections optional) and
/// writes its results into the output directory.
#[derive(Debug, Parser)]
#[command(name = "lmtsqueeze", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario TOML file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for Monte Carlo averaging, overriding `pulse.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Single output format, overriding `output.formats`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fringe scan and operating-point sensitivity of one protocol.
    Protocol,
    /// Pulse schedule and trajectory phase against the closed form.
    Phase,
    /// Blackman-pulse efficiency curve and the isotope-overlap plan.
    Blackman,
    /// Light-shift balancing offset per isotope.
    Lightshift {
        /// Isotope name; repeatable, overrides `species.isotopes`.
        #[arg(long)]
        species: Vec<String>,
    },
    /// Dual-isotope fringes, peak lock and Eötvös parameter.
    Ep,
    /// Closed-form shot-noise mission budget.
    Budget,
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

fn run(cli: Cli) -> error::CliResult<()> {
    let mut scenario = match &cli.config {
        Some(path) => Scenario::load(path)?,
        None => Scenario::default(),
    };
    if let Some(dir) = cli.out {
        scenario.output.directory = dir;
    }
    if let Some(seed) = cli.seed {
        scenario.pulse.seed = seed;
    }
    if let Some(f) = cli.format {
        scenario.output.formats = vec![f];
    }
    if let Command::Lightshift { species } = &cli.command {
        if !species.is_empty() {
            scenario.species.isotopes = species.clone();
        }
    }
    let out = commands::Output::new(&scenario.output)?;
    match cli.command {
        Command::Protocol => commands::protocol(&scenario, &out),
        Command::Phase => commands::phase(&scenario, &out),
        Command::Blackman => commands::blackman(&scenario, &out),
        Command::Lightshift { .. } => commands::lightshift(&scenario, &out),
        Command::Ep => commands::ep(&scenario, &out),
        Command::Budget => commands::budget(&scenario, &out),
    }
}
