use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Design, propagate and scan dephasing-assisted three-level population
/// transfer.
#[derive(Debug, Parser)]
#[command(name = "stirap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the decoupling detuning and fit it to a compact form.
    Design,
    /// Run one scenario and export its trajectory.
    Propagate,
    /// Evaluate a two-axis parameter grid.
    Scan,
    /// Evaluate the sixteen simultaneous-deviation rows of the baseline.
    #[command(name = "report-table2")]
    ReportTable2,
    /// Fit a Fourier or double-Gaussian form to detuning samples.
    Fit,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Sign of the master-equation dissipator.
    #[arg(long, global = true, value_enum)]
    pub sign: Option<Sign>,
    /// none | ode | fitted:fourier | fitted:gaussian
    #[arg(long, global = true, value_name = "SOURCE")]
    pub detuning: Option<String>,
    /// Compare results against thresholds and exit with 3 on failure.
    #[arg(long, global = true)]
    pub check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    GnuplotScript,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sign {
    Standard,
    Paper,
}

impl Sign {
    fn as_str(self) -> &'static str {
        match self {
            Sign::Standard => "standard",
            Sign::Paper => "paper",
        }
    }
}

/// Why a command stopped, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Check(Vec<String>),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Check(_) => 3,
        }
    }
}

const MAX_REPORTED: usize = 20;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Design => commands::design(&cli.common),
        Command::Propagate => commands::propagate(&cli.common),
        Command::Scan => commands::scan(&cli.common),
        Command::ReportTable2 => commands::report_table2(&cli.common),
        Command::Fit => commands::fit(&cli.common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("configuration error: {m}"),
                Failure::Numerical(m) => eprintln!("numerical failure: {m}"),
                Failure::Check(fails) => {
                    for m in fails.iter().take(MAX_REPORTED) {
                        eprintln!("check failed: {m}");
                    }
                    if fails.len() > MAX_REPORTED {
                        eprintln!("... and {} more failed checks", fails.len() - MAX_REPORTED);
                    }
                }
            }
            ExitCode::from(f.code())
        }
    }
}
