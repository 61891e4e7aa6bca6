//! Margins, per-stage reports and the files they are written to.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::svg::Chart;

/// One checked quantity. `budget` is an upper limit, except for names ending
/// in `_min`, where it is a lower limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margin {
    pub value: f64,
    pub budget: f64,
    pub pass: bool,
}

impl Margin {
    pub fn at_most(value: f64, budget: f64) -> Self {
        Self {
            value,
            budget,
            pass: value <= budget,
        }
    }

    pub fn at_least(value: f64, floor: f64) -> Self {
        Self {
            value,
            budget: floor,
            pass: value >= floor,
        }
    }

    /// Strict lower bound.
    pub fn above(value: f64, floor: f64) -> Self {
        Self {
            value,
            budget: floor,
            pass: value > floor,
        }
    }
}

#[derive(Debug, Default, Clone)]
pub struct StageReport {
    pub margins: Vec<(String, Margin)>,
    /// Conditions that only fail the run under `--strict`.
    pub warnings: Vec<String>,
    pub seconds: f64,
}

impl StageReport {
    pub fn push(&mut self, name: impl Into<String>, margin: Margin) {
        self.margins.push((name.into(), margin));
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn extend(&mut self, other: StageReport) {
        self.margins.extend(other.margins);
        self.warnings.extend(other.warnings);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub config_hash: String,
    pub margins: BTreeMap<String, Margin>,
    pub warnings: Vec<String>,
    pub strict: bool,
    pub timings: BTreeMap<String, f64>,
}

impl RunSummary {
    pub fn failures(&self) -> Vec<&str> {
        self.margins
            .iter()
            .filter(|(_, m)| !m.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty() && !(self.strict && !self.warnings.is_empty())
    }
}

/// Output location for one stage.
#[derive(Debug, Clone)]
pub struct StageDir(PathBuf);

impl StageDir {
    pub fn create(root: &Path, name: &str) -> Result<Self, CliError> {
        let dir = root.join(name);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self(dir))
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.0.join(file)
    }

    /// Writes a numeric table; NaN becomes an empty field.
    pub fn table(&self, file: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let path = self.path(file);
        let io = |e: csv::Error| CliError::io(&path, e.into());
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row.iter().map(|v| fmt_value(*v))).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }

    pub fn chart(&self, file: &str, chart: &Chart) -> Result<(), CliError> {
        let path = self.path(file);
        std::fs::write(&path, chart.render()).map_err(|e| CliError::io(&path, e))
    }
}

pub fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}
