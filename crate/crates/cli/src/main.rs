use std::process::ExitCode;

use clap::Parser;
use schatten_lab_cli::{main_with, Cli};

fn main() -> ExitCode {
    main_with(Cli::parse())
}
