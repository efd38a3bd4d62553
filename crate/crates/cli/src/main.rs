mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::Cli;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag values that clap cannot check on its own.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Manifest(#[from] neicap::manifest::ManifestError),
    #[error(transparent)]
    Construct(#[from] neicap::construct::ConstructError),
    #[error(transparent)]
    Audit(#[from] neicap::audit::AuditError),
    #[error(transparent)]
    Probe(#[from] neicap::probe::ProbeError),
    #[error(transparent)]
    Metrics(#[from] neicap::metrics::MetricsError),
    #[error(transparent)]
    Validate(#[from] neicap::validate::ValidateError),
    #[error(transparent)]
    Report(#[from] neicap::report::ReportError),
    #[error(transparent)]
    Serve(#[from] neicap_serve::ServeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("hint: run with --help for usage");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
