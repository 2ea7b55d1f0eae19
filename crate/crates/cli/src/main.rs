use std::process::ExitCode;

use clap::Parser;
use sdrkit_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command.run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sdrkit: {e}");
            ExitCode::from(e.error.exit_code() as u8)
        }
    }
}
