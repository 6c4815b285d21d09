use clap::Parser;
use hjselect::cli::{run, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(run(&Cli::parse()))
}
