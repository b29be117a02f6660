//! Report and run-metadata files.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use transweight::eval::{EvalReport, TSV_HEADER};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TSV: &str = "report.tsv";

/// Writes `report.json` and `report.tsv` for `report` under `dir`.
pub fn emit_report(report: &EvalReport, model: &str, dir: &Path) -> Result<()> {
    let json = report.to_json()?;
    fs::write(dir.join(REPORT_JSON), json + "\n").context("writing report.json")?;
    fs::write(dir.join(REPORT_TSV), report_tsv(report, model)?).context("writing report.tsv")?;
    Ok(())
}

pub fn report_tsv(report: &EvalReport, model: &str) -> Result<String> {
    report.validate()?;
    Ok(format!("{TSV_HEADER}\n{}\n", report.tsv_row(model)))
}

pub fn unix_seconds() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Name of the metadata file written by `command`.
pub fn metadata_file(command: &str) -> String {
    format!("run_{command}.json")
}

/// Timestamps live here and nowhere else, so every other output is
/// reproducible byte for byte.
pub fn write_metadata(dir: &Path, command: &str, started: u64) -> Result<()> {
    let text = format!(
        "{{\n  \"command\": \"{command}\",\n  \"version\": \"{}\",\n  \"started_unix\": {started},\n  \"finished_unix\": {}\n}}\n",
        env!("CARGO_PKG_VERSION"),
        unix_seconds()
    );
    fs::write(dir.join(metadata_file(command)), text).context("writing run metadata")
}
