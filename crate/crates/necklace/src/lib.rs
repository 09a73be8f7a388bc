//! Command-line front end of the necklace toolkit: argument and config-file
//! handling, subcommand dispatch and CSV/JSON report emission.
//!
//! Exit codes: 0 on success, 1 on a failed verification or a numerical
//! failure, 2 on usage errors and out-of-domain parameters.

use std::ffi::OsString;
use std::io::{BufWriter, Write};

pub mod commands;
pub mod config;
mod error;
pub mod output;

pub use config::{parse_args, Command, Format, RunConfig};
pub use error::CliError;

/// Runs one invocation; `argv` includes the program name.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run_inner(argv) {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            CliError::Clap(e).exit_code()
        }
        Err(e) => {
            eprintln!("necklace: {e}");
            e.exit_code()
        }
    }
}

fn run_inner<I, T>(argv: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = parse_args(argv)?;
    necklace_verify::init_threads();
    let (report, status) = commands::execute(&cfg)?;
    match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(std::fs::File::create(path)?);
            output::write_report(&mut w, &report, cfg.format)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(std::io::stdout().lock());
            output::write_report(&mut w, &report, cfg.format)?;
            w.flush()?;
        }
    }
    status.map_or(Ok(()), Err)
}
