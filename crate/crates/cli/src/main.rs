use std::process::ExitCode;

use clap::Parser;

mod args;
mod error;
mod modes;

use args::Args;
use error::CliError;

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            return CliError::Usage(first.trim_start_matches("error: ").to_string()).report();
        }
    };
    match modes::run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
