//! Append-only JSON-lines run records.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub algorithm: String,
    /// `None` for algorithms without an α parameter.
    pub alpha: Option<f64>,
    pub seed: u64,
    pub metrics: MetricReport,
    pub iterations: usize,
    pub wall_time_seconds: f64,
    pub objective_final: f64,
}

/// Appends one record as a single JSON line.
pub fn append_record(path: impl AsRef<Path>, rec: &RunRecord) -> Result<()> {
    let mut line = serde_json::to_string(rec)?;
    line.push('\n');
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    // One write call per record keeps lines intact under a single writer.
    f.write_all(line.as_bytes())?;
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}
