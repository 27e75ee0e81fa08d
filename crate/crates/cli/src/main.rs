//! Command-line entry point: deterministic simulation, verification,
//! analysis, and power sweeps for preference-elicitation experiments.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 data error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::FileConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError::Data(message.into())
    }
}

impl From<preflab::Error> for CliError {
    fn from(error: preflab::Error) -> Self {
        CliError::Data(error.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Structured,
}

#[derive(Parser)]
#[command(
    name = "preflab",
    about = "Utility-theoretic simulation and analysis of human evaluation protocols",
    version
)]
struct Cli {
    /// Master seed; every run is reproducible from its configuration alone.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Plain-text key=value configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format for reports.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the built-in demonstration and verification suite.
    Verify(commands::verify::VerifyArgs),
    /// Generate synthetic annotation datasets in the CSV schemas.
    Simulate(commands::simulate::SimulateArgs),
    /// Ingest annotation CSVs, apply filters, and build the comparison report.
    Analyze(commands::analyze::AnalyzeArgs),
    /// Monte Carlo power analysis over a grid of (m, n_A) design points.
    Power(commands::power::PowerArgs),
}

/// Settings shared by every command.
pub struct Context {
    pub seed: u64,
    pub format: OutputFormat,
    pub file: FileConfig,
}

/// Config keys every command accepts.
pub const GLOBAL_KEYS: [&str; 2] = ["seed", "format"];

fn build_context(cli: &Cli) -> Result<Context, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let seed = config::resolve(cli.seed, file.parse_value("seed")?, 0);
    let format_from_file = match file.get("format") {
        None => None,
        Some("text") => Some(OutputFormat::Text),
        Some("structured") => Some(OutputFormat::Structured),
        Some(other) => {
            return Err(CliError::usage(format!(
                "config key `format`: `{other}` is not text|structured"
            )))
        }
    };
    let format = config::resolve(cli.format, format_from_file, OutputFormat::Text);
    Ok(Context { seed, format, file })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let context = match build_context(&cli) {
        Ok(context) => context,
        Err(error) => return report(error),
    };
    let outcome = match &cli.command {
        Command::Verify(args) => commands::verify::run(&context, args),
        Command::Simulate(args) => commands::simulate::run(&context, args).map(|_| true),
        Command::Analyze(args) => commands::analyze::run(&context, args).map(|_| true),
        Command::Power(args) => commands::power::run(&context, args).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(error) => report(error),
    }
}

fn report(error: CliError) -> ExitCode {
    match error {
        CliError::Usage(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        CliError::Data(message) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}
