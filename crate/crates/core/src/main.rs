use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use exotic::cli::{execute, Cli};

fn main() -> ExitCode {
  let cli = Cli::parse();
  let outcome = execute(&cli);
  let mut stdout = std::io::stdout().lock();
  if stdout.write_all(outcome.render().as_bytes()).and_then(|()| stdout.flush()).is_err() {
    return ExitCode::from(2);
  }
  if !cli.quiet {
    eprintln!("{}", outcome.summary);
  }
  ExitCode::from(outcome.exit as u8)
}
