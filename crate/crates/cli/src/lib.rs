//! Command-line front end: file formats, the run configuration and the
//! `hazrank` subcommands.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;

pub use commands::{run, Cli};
pub use error::{CliError, EXIT_INSUFFICIENT, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE};
