use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

/// Bumped whenever a field of [`Summary`] changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// What a subcommand hands back: a verdict, its results and the CSV files.
pub struct Outcome {
    pub passed: bool,
    /// Printed verdict; `pass`/`fail` unless the command reports a state.
    pub label: String,
    pub detail: String,
    pub results: Value,
    pub csv: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn new(passed: bool, detail: impl Into<String>, results: Value) -> Self {
        Self {
            passed,
            label: if passed { "pass" } else { "fail" }.to_string(),
            detail: detail.into(),
            results,
            csv: Vec::new(),
        }
    }

    pub fn with_csv(mut self, name: &str, bytes: Vec<u8>) -> Self {
        self.csv.push((name.to_string(), bytes));
        self
    }
}

#[derive(Serialize)]
pub struct Metadata {
    pub timestamp_unix: u64,
    pub crate_version: &'static str,
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub schema_version: u32,
    pub command: &'a str,
    pub verdict: &'a str,
    pub passed: bool,
    pub detail: &'a str,
    pub csv_files: Vec<String>,
    pub config: &'a RunConfig,
    pub results: &'a Value,
    /// The only field that differs between identical runs.
    pub metadata: Metadata,
}

/// Writes the CSV files, then the summary, into `config.out_dir`.
pub fn write_artifacts(
    command: &str,
    config: &RunConfig,
    outcome: &Outcome,
) -> std::io::Result<PathBuf> {
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for (part, bytes) in &outcome.csv {
        let name = format!("{command}.{part}.csv");
        std::fs::write(dir.join(&name), bytes)?;
        names.push(name);
    }
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        command,
        verdict: &outcome.label,
        passed: outcome.passed,
        detail: &outcome.detail,
        csv_files: names,
        config,
        results: &outcome.results,
        metadata: Metadata {
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            crate_version: env!("CARGO_PKG_VERSION"),
        },
    };
    let path = summary_path(dir, command);
    let json = serde_json::to_vec_pretty(&summary).map_err(std::io::Error::other)?;
    std::fs::write(&path, json)?;
    Ok(path)
}

pub fn summary_path(dir: &Path, command: &str) -> PathBuf {
    dir.join(format!("{command}.summary.json"))
}

/// Serialises rows into CSV bytes with a header from the field names.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> hardy_core::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    w.into_inner()
        .map_err(|e| hardy_core::HardyError::Io(e.into_error()))
}
