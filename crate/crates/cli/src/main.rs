mod args;
mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, CommonArgs};
use commands::CliError;
use report::Report;

fn write_report(report: &Report, common: &CommonArgs) -> io::Result<()> {
    match &common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report::emit(report, common.format, common.digits, &mut w)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            report::emit(report, common.format, common.digits, &mut lock)
        }
    }
}

fn main() -> ExitCode {
    let argv = match args::expand_config(std::env::args().collect()) {
        Ok(argv) => argv,
        Err(msg) => {
            eprintln!("usage error: {msg}");
            return ExitCode::from(commands::EXIT_USAGE as u8);
        }
    };
    let cli = Cli::parse_from(argv);

    let (outcome, common) = match &cli.command {
        Command::Series(a) => (commands::series(a), &a.common),
        Command::Solve(c) => (commands::solve(c), c),
        Command::Shoot(c) => (commands::shoot(c), c),
        Command::Profile(a) => (commands::profile(a), &a.common),
        Command::Compare(c) => (commands::compare(c), c),
    };

    let (report, code) = match outcome {
        Ok(report) => (Some(report), 0),
        Err(err) => {
            let code = err.exit_code();
            eprintln!("error: {err}");
            match err {
                CliError::CheckFailed(report) | CliError::Partial(report, _) => {
                    (Some(*report), code)
                }
                _ => (None, code),
            }
        }
    };
    if let Some(report) = report {
        if let Err(e) = write_report(&report, common) {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(commands::EXIT_FAILURE as u8);
        }
    }
    ExitCode::from(code as u8)
}
