//! `lpdo`: command-line front end for the lattice pseudo-difference toolkit.
//!
//! Reports go to stdout as JSON, errors to stderr as JSON. Exit codes: 0 ok,
//! 1 verification failure, 2 usage or parse error, 3 numeric precondition.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
use crate::report::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => return fail(&Failure::Usage(e.to_string())),
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => fail(&failure),
    }
}

fn fail(failure: &Failure) -> ExitCode {
    eprintln!("{}", failure.to_json());
    ExitCode::from(failure.exit_code())
}
