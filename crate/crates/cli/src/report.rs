//! Run reports and atomic output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::exit::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Everything but `wall_clock_seconds` is a pure function of (spec, flags).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved spec and flags, defaults filled in.
    pub config: Value,
    pub result: Value,
    pub verdict: Option<Verdict>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports hold finite JSON values");
        s.push('\n');
        s
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable result")
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::run(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit(report: &RunReport, out: Option<&Path>) -> Result<(), CliError> {
    let text = report.to_json();
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// One CSV row per boundary point: w_R, w_RK, R, R_K, active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub w_r: f64,
    pub w_rk: f64,
    pub r: f64,
    pub r_k: f64,
    /// Active constraint labels joined by "; ".
    pub active: String,
}

pub fn boundary_csv(rows: &[CsvRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::run(format!("csv: {e}"));
    w.write_record(["w_R", "w_RK", "R", "R_K", "active"])
        .map_err(fail)?;
    for r in rows {
        w.write_record([
            r.w_r.to_string(),
            r.w_rk.to_string(),
            r.r.to_string(),
            r.r_k.to_string(),
            r.active.clone(),
        ])
        .map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| CliError::run(format!("csv: {e}")))
}
