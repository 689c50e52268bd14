use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = r3_cli::cli::Cli::parse();
    match r3_cli::cli::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
