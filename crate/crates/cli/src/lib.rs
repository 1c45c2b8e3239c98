//! Command-line front end for `dsine-core`: every subcommand prints a JSON
//! report, optionally writes CSV detail tables, and exits 0 only when all of
//! its assertions pass.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{Cli, Command, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Parses `args`, runs the command and reports on stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    match run_cli(cli) {
        Ok(rep) => {
            print!("{}", rep.json);
            let _ = std::io::stdout().flush();
            if rep.outcome.passed() {
                EXIT_PASS
            } else {
                for a in rep.outcome.assertions.iter().filter(|a| !a.passed) {
                    eprintln!("FAILED: {} ({})", a.name, a.detail);
                }
                EXIT_ASSERTION
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

/// Runs a parsed command line and writes the report files.
pub fn run_cli(cli: Cli) -> anyhow::Result<Report> {
    let (file, command, globals) = commands::resolve(cli)?;
    if let Some(n) = globals.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let rep = commands::execute(&file, command, &globals)?;
    if let Some(dir) = &rep.out_dir {
        output::write_files(dir, &rep.command, &rep.json, &rep.outcome)?;
    }
    Ok(rep)
}
