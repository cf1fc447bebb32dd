use std::fs;
use std::io::Write;
use std::path::Path;

use super::report::DefectReport;
use super::{HarnessError, HarnessResult};

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> HarnessResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

/// Per-sample CSV: `sample_index,defect_raw,defect_normalized,rejected_reason`, LF line endings.
pub fn csv_bytes(report: &DefectReport) -> HarnessResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let err = |e: csv::Error| HarnessError::Io(e.to_string());
    w.write_record(["sample_index", "defect_raw", "defect_normalized", "rejected_reason"])
        .map_err(err)?;
    for s in &report.samples {
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        w.write_record([
            s.index.to_string(),
            fmt(s.raw),
            fmt(s.normalized),
            s.rejected.map(|r| r.name().to_string()).unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))
}

pub fn write_csv(path: &Path, report: &DefectReport) -> HarnessResult<()> {
    write_atomic(path, &csv_bytes(report)?)
}

pub fn write_summary_json(path: &Path, value: &serde_json::Value) -> HarnessResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
