//! Command line front end for `rotbec`: TOML configuration, the built-in
//! model presets, binary state snapshots, history and density exporters,
//! and the subcommand drivers used by the `rotbec` binary.

pub mod commands;
pub mod config;
pub mod export;
pub mod fmt;
pub mod preset;
pub mod state_file;

pub use config::ConfigFile;
pub use state_file::StateFile;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rotbec::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse configuration: {0}")]
    Parse(String),

    #[error("invalid state file: {0}")]
    State(String),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}
