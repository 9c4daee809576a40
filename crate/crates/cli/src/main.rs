use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = relaxid_cli::Cli::parse();
    match relaxid_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
