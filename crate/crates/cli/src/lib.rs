//! Table-producing front end for the dephasing engine.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod params;
pub mod table;

pub use params::{Format, Params, Spacing};
pub use table::{Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dephase_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// 2 for configuration and output errors, 3 for numerical failures,
    /// 4 when the two criteria fire together.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(e) if matches!(e.root(), dephase_core::Error::Inconsistency { .. }) => 4,
            CliError::Core(e) if e.is_input_error() || matches!(e.root(), dephase_core::Error::Truncation { .. }) => 2,
            CliError::Core(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dephase", version, about = "Separability and entanglement of a dephasing qubit with its thermal bath")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML file with run parameters; flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for the Monte-Carlo check
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads, 0 = all cores
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decoherence rate, accumulated exponent and |D| over time
    #[command(allow_negative_numbers = true)]
    Rate(Params),
    /// Region labels on a temperature x time grid
    #[command(allow_negative_numbers = true)]
    PhaseDiagram(Params),
    /// Fraction of the Bloch ball still separable at the decoherence time
    #[command(allow_negative_numbers = true)]
    Fraction(Params),
    /// Separable and entangled boundaries in the phi = 0 cut of the Bloch ball
    #[command(allow_negative_numbers = true)]
    BlochCut(Params),
    /// Witnesses and labels along time at one temperature
    #[command(allow_negative_numbers = true)]
    Oscillations(Params),
    /// Fock-space PT crossings against the closed-form single-mode onsets
    #[command(allow_negative_numbers = true)]
    SingleMode(Params),
}

impl Command {
    fn params(&self) -> &Params {
        match self {
            Command::Rate(p)
            | Command::PhaseDiagram(p)
            | Command::Fraction(p)
            | Command::BlochCut(p)
            | Command::Oscillations(p)
            | Command::SingleMode(p) => p,
        }
    }
}

/// Defaults, then the config file, then flags.
pub fn resolve(cli: &Cli) -> Result<Params, CliError> {
    let file = match &cli.global.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            Params::from_toml(&text)?
        }
        None => Params::default(),
    };
    let flags = Params {
        out: cli.global.out.clone(),
        format: cli.global.format,
        seed: cli.global.seed,
        threads: cli.global.threads,
        ..cli.command.params().clone()
    };
    Ok(commands::defaults(&cli.command).overlay(&file).overlay(&flags))
}

/// Run a parsed command line; the summary line (if any) goes to stderr.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let params = resolve(cli)?;
    if let Some(threads) = params.threads {
        // a second call in the same process fails harmlessly; keep the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let output = commands::execute(&cli.command, &params)?;
    let format = params.format();
    match &params.out {
        Some(path) => {
            let mut buf = Vec::new();
            output.table.write(format, &mut buf)?;
            fs::write(path, buf).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            output.table.write(format, &mut lock)?;
            lock.flush()?;
        }
    }
    if let Some(summary) = output.summary {
        eprintln!("{summary}");
    }
    Ok(())
}
