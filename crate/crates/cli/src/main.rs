use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rmlab_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if outcome.destination.is_none() {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(outcome.text.as_bytes()).is_err() {
                    return ExitCode::from(1);
                }
            } else if let Some(path) = &outcome.destination {
                eprintln!("wrote {}", path.display());
            }
            for f in &outcome.failures {
                eprintln!("FAILED {}: {}", f.check, f.detail);
            }
            if outcome.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
