//! Command-line front end: config parsing, the `run`, `sweep` and
//! `calibrate` commands, and SVG rendering of phase diagrams.

pub mod commands;
pub mod config;
pub mod render;

use thiserror::Error;

/// Failure of a CLI command, mapped onto a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration.
    #[error("{0}")]
    Usage(String),
    /// Reading or writing files failed.
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    /// A simulation broke one of its own invariants.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub const EXIT_IO: i32 = 1;
    pub const EXIT_USAGE: i32 = 2;
    pub const EXIT_INTERNAL: i32 = 3;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => Self::EXIT_USAGE,
            CliError::Io { .. } => Self::EXIT_IO,
            CliError::Internal(_) => Self::EXIT_INTERNAL,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<reward_sim::Error> for CliError {
    fn from(e: reward_sim::Error) -> Self {
        use reward_sim::Error as E;
        match e {
            E::InvalidInput(_) | E::InvalidParam { .. } | E::Json(_) => CliError::Usage(e.to_string()),
            E::Domain(_) | E::Invariant(_) => CliError::Internal(e.to_string()),
            E::Io(source) => CliError::io("i/o", source),
        }
    }
}
