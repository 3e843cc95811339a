use std::fs;
use std::path::Path;

use crate::commands::Outcome;
use crate::error::{CliError, CliResult};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

/// Writes `report.json` and `profile.csv` into `dir`, and each sweep member
/// into its own subdirectory.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let report = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    text.push('\n');
    fs::write(&report, text).map_err(io_err(&report))?;
    let csv = dir.join("profile.csv");
    fs::write(&csv, &outcome.csv).map_err(io_err(&csv))?;
    for (name, child) in &outcome.children {
        write_outcome(&dir.join(name), child)?;
    }
    Ok(())
}
