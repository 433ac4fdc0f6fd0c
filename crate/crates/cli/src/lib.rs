//! Command-line front end: argument parsing, dispatch and exit codes.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use eit_core::scan::ScanSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Solver(String),
    #[error("output: {0}")]
    Io(#[from] io::Error),
}

impl From<eit_core::Error> for CliError {
    fn from(e: eit_core::Error) -> Self {
        if e.is_config_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Solver(e.to_string())
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "eit-sim", version, about = "Probe propagation in a dense EIT medium")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Built-in preset name (see `presets list`).
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON config file: a bare config object or a preset document.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate χ(Δ₃₁) and k·z on a detuning grid.
    Susceptibility {
        #[command(flatten)]
        source: Source,
        /// Lowest probe detuning Δ₃₁, in units of γ₃₁.
        #[arg(long, allow_negative_numbers = true, default_value_t = -8.0)]
        dmin: f64,
        /// Highest probe detuning Δ₃₁, in units of γ₃₁.
        #[arg(long, allow_negative_numbers = true, default_value_t = 8.0)]
        dmax: f64,
        /// Number of grid points, end points included.
        #[arg(long, default_value_t = 801)]
        steps: usize,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Propagate the Gaussian probe through the medium.
    Propagate {
        #[command(flatten)]
        source: Source,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Write every k-th depth slice; entrance and exit only when omitted.
        #[arg(long)]
        store_every: Option<usize>,
    },
    /// Compare the numeric exit pulse with the closed-form solution.
    Analyze {
        #[command(flatten)]
        source: Source,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Skip the numeric propagation.
        #[arg(long)]
        analytic_only: bool,
    },
    /// Peak transmission over (γ_s, r_a/r_e).
    Scan {
        #[command(flatten)]
        source: Source,
        /// Smallest γ_s in units of γ₃₁; the axis is log-spaced.
        #[arg(long, default_value_t = ScanSpec::default().gs_min)]
        gs_min: f64,
        #[arg(long, default_value_t = ScanSpec::default().gs_max)]
        gs_max: f64,
        #[arg(long, default_value_t = ScanSpec::default().gs_steps)]
        gs_steps: usize,
        /// Smallest trapping ratio r_a/r_e; the axis is linear.
        #[arg(long, default_value_t = ScanSpec::default().trap_min)]
        trap_min: f64,
        #[arg(long, default_value_t = ScanSpec::default().trap_max)]
        trap_max: f64,
        #[arg(long, default_value_t = ScanSpec::default().trap_steps)]
        trap_steps: usize,
        /// Worker threads; defaults to the number of available cores.
        #[arg(long, env = "SIM_WORKERS")]
        workers: Option<usize>,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Built-in parameter sets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Run the acceptance criteria and report measured against expected values.
    Selftest {
        /// Criterion to run (repeatable); all ten when omitted.
        #[arg(long = "only", value_parser = clap::value_parser!(u8).range(1..=10))]
        only: Vec<u8>,
        /// Also write selftest.json and a manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    /// Print the preset names.
    List,
    /// Print one preset as JSON.
    Show { name: String },
}

fn source_config(s: &Source) -> Result<eit_core::SystemConfig, CliError> {
    config::resolve(s.preset.as_deref(), s.config.as_deref())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Susceptibility {
            source,
            dmin,
            dmax,
            steps,
            out,
        } => commands::susceptibility(&source_config(&source)?, dmin, dmax, steps, &out)?,
        Command::Propagate {
            source,
            out,
            store_every,
        } => commands::propagate(&source_config(&source)?, store_every, &out)?,
        Command::Analyze {
            source,
            out,
            analytic_only,
        } => commands::analyze(&source_config(&source)?, analytic_only, &out)?,
        Command::Scan {
            source,
            gs_min,
            gs_max,
            gs_steps,
            trap_min,
            trap_max,
            trap_steps,
            workers,
            out,
        } => {
            let cfg = source_config(&source)?;
            let spec = ScanSpec {
                gs_min,
                gs_max,
                gs_steps,
                trap_min,
                trap_max,
                trap_steps,
                workers: workers.unwrap_or(ScanSpec::default().workers),
            };
            commands::scan(&cfg, &spec, &out)?
        }
        Command::Presets { action } => match action {
            PresetAction::List => commands::presets_list(),
            PresetAction::Show { name } => commands::presets_show(&name)?,
        },
        Command::Selftest { only, out } => {
            let ids: Vec<u8> = if only.is_empty() {
                acceptance::CRITERIA.iter().map(|(k, _)| *k).collect()
            } else {
                only
            };
            if !commands::selftest(&ids, out.as_deref())? {
                return Ok(EXIT_SELFTEST);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            // clap sends help and version to stdout and usage errors to stderr.
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
