//! `causal-advisor` command-line pipeline: synthesize or load data, discover
//! a graph, fit a linear SCM, estimate effects, answer counterfactual queries
//! and serve them over HTTP.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod service;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::Cli;
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "CAUSAL_ADVISOR_THREADS";

fn configure_threads() -> CliResult<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::data(
            "invalid_config",
            format!("{THREADS_ENV} must be a positive integer, got `{raw}`"),
        )
    })?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(Some(n))
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    let first = e.to_string();
                    let first = first
                        .lines()
                        .next()
                        .unwrap_or("")
                        .trim_start_matches("error: ");
                    let _ = writeln!(err, "{}", CliError::usage(first).line());
                    error::EXIT_USAGE
                }
            };
        }
    };
    let result = configure_threads().and_then(|threads| commands::execute(cli, threads, out, err));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.line());
            e.code
        }
    }
}
