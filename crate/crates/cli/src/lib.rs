//! Command implementations behind the `qecarch` binary. Each `cmd_*`
//! function writes its files under the configured output directory and
//! returns a typed outcome whose `summary()` is what the binary prints.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use args::{Cli, Command};
pub use commands::{cmd_audit, cmd_gen, cmd_schedule, cmd_sweep};
pub use config::RunConfig;
pub use report::cmd_report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: qecarch::Error,
    },
}

impl CliError {
    pub fn core(context: impl Into<String>, source: qecarch::Error) -> Self {
        CliError::Core { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use qecarch::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core { source, .. } => match source {
                E::Unschedulable { .. } | E::Infeasible { .. } | E::HorizonTooSmall(_) | E::InfeasibleClock => {
                    EXIT_INFEASIBLE
                }
                E::Io(_) => EXIT_IO,
                _ => EXIT_USAGE,
            },
        }
    }
}

impl From<qecarch::Error> for CliError {
    fn from(e: qecarch::Error) -> Self {
        CliError::core("error", e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn write_output(dir: &Path, name: &str, contents: &[u8]) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Parses and runs one invocation, returning the text to print.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Gen(a) => Ok(cmd_gen(&a)?.summary()),
        Command::Schedule(a) => Ok(cmd_schedule(&RunConfig::load(&a)?)?.summary()),
        Command::Audit(a) => Ok(cmd_audit(&RunConfig::load(&a)?)?.summary()),
        Command::Sweep(a) => {
            let cfg = RunConfig::load(&a.common)?;
            Ok(cmd_sweep(&cfg, &a.m_values)?.summary())
        }
        Command::Report(a) => Ok(cmd_report(&RunConfig::load(&a)?)?.summary()),
    }
}
