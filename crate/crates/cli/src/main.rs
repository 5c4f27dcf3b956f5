use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = chordlab_cli::Cli::parse();
    if let Err(e) = chordlab_cli::configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    ExitCode::from(chordlab_cli::run(&cli))
}
