//! Command-line front end for `relaxid`.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;
pub mod recipes;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult, ExitKind};
