//! `excited-vdw`: forces, energies, emission and figure data as CSV or JSON.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
//! 3 numerical failure.

mod commands;
mod config;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use excited_vdw::Error;

use commands::{EmissionArgs, FigureArgs, Outcome, SweepArgs, VerifyArgs};
use config::{ConfigFile, Format, OptionArgs, PhysArgs};

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::QuadratureNotConverged { .. }
            | Error::NonFiniteSample { .. }
            | Error::PhasePrecisionLoss(_)
            | Error::NearFieldUnderflow { .. } => CliError::Numerical(e.to_string()),
            Error::DegenerateFrequencies => {
                CliError::Invalid(format!("{e}; rerun with --mode identical"))
            }
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "excited-vdw", version, about = "Time-dependent van der Waals forces between two atoms, one suddenly excited")]
struct Cli {
    /// JSON file whose keys mirror the flags; flags win on conflict
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path, or - for stdout
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    options: OptionArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Force on each atom, block by block
    Force(PhysArgs),
    /// Net force on the pair
    Net(PhysArgs),
    /// Interaction energy of each atom (dissimilar atoms)
    Energy(PhysArgs),
    /// Directional emission table, or its momentum moment with --moment
    Emission {
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        emission: EmissionArgs,
    },
    /// Normalized net-force curves for identical and detuned atoms
    Figure(FigureArgs),
    /// Run the consistency suite; exit 1 if a mandatory check fails
    Verify(VerifyArgs),
    /// Evaluate selected quantities along one parameter
    Sweep {
        #[command(flatten)]
        phys: PhysArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let file = ConfigFile::load(cli.config.as_deref())?;
    if let Some(n) = cli.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("--threads: {e}")))?;
    }
    let opts = cli.options.eval_options(&file)?;
    let outcome: Outcome = match &cli.command {
        Command::Force(p) => commands::cmd_force(&p.merged(&file).resolve()?, &opts)?,
        Command::Net(p) => commands::cmd_net(&p.merged(&file).resolve()?, &opts)?,
        Command::Energy(p) => commands::cmd_energy(&p.merged(&file).resolve()?, &opts)?,
        Command::Emission { phys, emission } => commands::cmd_emission(&phys.merged(&file).resolve()?, &opts, emission)?,
        Command::Figure(a) => commands::cmd_figure(a, &file, &opts)?,
        Command::Verify(a) => commands::cmd_verify(a, &opts)?,
        Command::Sweep { phys, sweep } => commands::cmd_sweep(sweep, &phys.merged(&file), &opts)?,
    };
    let text = match cli.format.or(file.format).unwrap_or_default() {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => {
            let v = outcome.json.unwrap_or_else(|| outcome.table.to_json());
            serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))? + "\n"
        }
    };
    match cli.out.as_deref().or(file.out.as_deref()) {
        None | Some("-") => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string()))?,
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{path}: {e}")))?,
    }
    Ok(outcome.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
