use std::process::ExitCode;

use clap::Parser;
use rangegov::cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("rangegov: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
