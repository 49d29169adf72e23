use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = qnad_cli::Cli::parse();
    match qnad_cli::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (category, code) = qnad_cli::error_category(&err);
            eprintln!("error[{category}]: {err:#}");
            ExitCode::from(code)
        }
    }
}
