//! CSV time series and JSON summaries.

use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl OutputError {
    fn at(path: &Path, e: impl std::fmt::Display) -> Self {
        OutputError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

/// A table of samples; the first column is conventionally `time`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// 17 significant digits, so values round-trip exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn emit_series(series: &Series, path: &Path) -> Result<(), OutputError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| OutputError::at(path, e))?;
    w.write_record(&series.columns).map_err(|e| OutputError::at(path, e))?;
    for row in &series.rows {
        w.write_record(row.iter().map(|&v| format_value(v)))
            .map_err(|e| OutputError::at(path, e))?;
    }
    w.flush().map_err(|e| OutputError::at(path, e))
}

pub fn emit_summary<T: Serialize>(summary: &T, path: &Path) -> Result<(), OutputError> {
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| OutputError::at(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| OutputError::at(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        emit_series(&Series::new(["time", "fluid_s3"]), &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "time,fluid_s3\n");
    }

    #[test]
    fn values_use_fixed_precision_and_lf() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let mut s = Series::new(["time", "x"]);
        s.push(vec![0.1, -2.5e-7]);
        emit_series(&s, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "time,x\n1.0000000000000001e-1,-2.4999999999999999e-7\n");
        assert!(!text.contains('\r'));
        let back: f64 = text.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn io_errors_name_the_path() {
        let p = Path::new("/nonexistent-dir/x.csv");
        let e = emit_series(&Series::new(["time"]), p).unwrap_err();
        assert!(e.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
