mod args;
mod commands;
mod input;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use report::{CliError, USAGE_EXIT};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE_EXIT as u8),
            };
        }
    };
    match commands::run(&cli) {
        Ok(outcome) => {
            let doc = serde_json::Value::Object(outcome.payload);
            // a closed stdout (e.g. piped into head) is not an error
            let _ = writeln!(
                std::io::stdout().lock(),
                "{}",
                serde_json::to_string_pretty(&doc).unwrap_or_default()
            );
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE_EXIT as u8)
        }
    }
}
