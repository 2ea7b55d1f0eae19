//! Command-line front end for `sdrkit`.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;

use clap::Parser;

pub use commands::Command;
pub use error::{CliError, StageError};

#[derive(Debug, Parser)]
#[command(name = "sdrkit", version, about = "Sufficient dimension reduction via inverse conditional independence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}
