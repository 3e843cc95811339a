//! Command line front end for `lrlab-core`: reads an experiment config,
//! runs one of the subcommands and writes `report.json` and `profile.csv`.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod build;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod propcheck;

use std::path::Path;

pub use commands::{run, Command, Outcome};
pub use config::Config;
pub use error::{CliError, CliResult};

/// Loads `config`, runs `command` and writes the results into `out`.
///
/// Failed certificates are still written before the error is returned.
pub fn execute(command: Command, config: &Path, out: &Path) -> CliResult<Outcome> {
    let cfg = Config::load(config)?;
    let outcome = run(command, &cfg)?;
    output::write_outcome(out, &outcome)?;
    if !outcome.passed {
        return Err(CliError::Failed(outcome.summary.clone()));
    }
    Ok(outcome)
}
