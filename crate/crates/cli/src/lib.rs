//! Library side of the `energy-shield` command-line tool: config types and
//! command implementations, exposed so that they can be tested directly.

pub mod commands;
pub mod config;
pub mod error;

pub use error::CliError;
