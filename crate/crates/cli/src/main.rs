use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = bcn_cli::Cli::parse();
    match bcn_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bcn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
