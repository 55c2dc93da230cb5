//! Command-line driver: resolves an experiment from flags, an optional config file and
//! defaults, runs it, and writes CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;

use std::path::Path;

use thiserror::Error;

pub use args::{Cli, Command};
pub use config::{resolve, ExperimentConfig, WORKERS_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] covertsim_core::Error),
    /// A computed region row failed its independent re-check.
    #[error("region point failed re-certification: {0}")]
    Certification(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Certification(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Resolves the experiment behind a parsed command line.
pub fn experiment(command: &Command, workers_env: Option<String>) -> Result<ExperimentConfig, CliError> {
    let common = command.common();
    let file = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_error(path))?;
            Some(config::parse_config(&text, path)?)
        }
        None => None,
    };
    let baseline = matches!(command, Command::Region(r) if r.baseline);
    resolve(common.layer.clone(), file, workers_env, baseline)
}

/// Produces the CSV text for `command` under `config`.
pub fn render(command: &Command, config: &ExperimentConfig) -> Result<String, CliError> {
    if config.sweep.is_some() && !matches!(command, Command::AvgError(_)) {
        return Err(CliError::Usage(format!(
            "--sweep is not supported by `{}`",
            command.name()
        )));
    }
    match command {
        Command::Threshold(_) => commands::threshold(config),
        Command::AvgError(_) => commands::avg_error(config),
        Command::Outage(_) => commands::outage_curve(config),
        Command::Region(_) => commands::region(config),
        Command::McValidate(_) => commands::mc_validate(config),
    }
}

/// Runs `command` and writes its CSV to the configured destination.
pub fn run(command: &Command, workers_env: Option<String>) -> Result<(), CliError> {
    let config = experiment(command, workers_env)?;
    let csv = render(command, &config)?;
    match &config.output {
        Some(path) => std::fs::write(path, csv).map_err(io_error(path)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(csv.as_bytes())
                .and_then(|_| out.flush())
                .map_err(io_error(Path::new("<stdout>")))
        }
    }
}
