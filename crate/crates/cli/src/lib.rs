//! Experiment driver: argument parsing, command execution and artifact
//! rendering for `rmlab`.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod verify;

pub use args::Cli;
pub use commands::{execute, run, Outcome};
pub use error::{CliError, CliResult};
