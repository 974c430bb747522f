use std::process::ExitCode;

use clap::Parser;
use fourier_moments::cli::{self, Cli};

fn main() -> ExitCode {
    let parsed = Cli::parse();
    let stdout = std::io::stdout();
    match cli::run(parsed, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
