//! Suite reports: `report.json` (deterministic), `summary.csv` and
//! `meta.json` (timing).

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::norms::serialize_extended;

use super::config::{GridConfig, PartitionConfig, Suite};

/// A tolerance-bound check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    #[serde(serialize_with = "serialize_extended")]
    pub value: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub tolerance: f64,
}

/// A recorded value with no pass/fail meaning of its own.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Anchor {
    pub name: String,
    #[serde(serialize_with = "serialize_extended")]
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// `f64` as CSV text, `inf` for infinity.
pub fn cell(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub grid: GridConfig,
    pub partition: PartitionConfig,
    pub seed: u64,
    pub cases: usize,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    pub anchors: Vec<Anchor>,
    pub warnings: Vec<String>,
    pub details: serde_json::Value,
    #[serde(skip)]
    pub table: Table,
}

impl Report {
    pub fn new(suite: Suite, grid: GridConfig, partition: PartitionConfig, seed: u64) -> Self {
        Self {
            suite,
            grid,
            partition,
            seed,
            cases: 0,
            passed: true,
            assertions: Vec::new(),
            anchors: Vec::new(),
            warnings: Vec::new(),
            details: serde_json::Value::Null,
            table: Table::default(),
        }
    }

    /// Records `value <= tolerance`.
    pub fn assert_le(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.assert_that(name, value <= tolerance, value, tolerance);
    }

    pub fn assert_that(&mut self, name: impl Into<String>, passed: bool, value: f64, tolerance: f64) {
        self.passed &= passed;
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            value,
            tolerance,
        });
    }

    pub fn anchor(&mut self, name: impl Into<String>, value: f64) {
        self.anchors.push(Anchor {
            name: name.into(),
            value,
        });
    }

    pub fn warn(&mut self, text: impl Into<String>) {
        self.warnings.push(text.into());
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub suite: Suite,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub elapsed_seconds: f64,
    pub workers: usize,
    pub version: &'static str,
}

pub fn write_outputs(dir: &Path, report: &Report, meta: &Meta) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report.to_json()?)?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record(&report.table.headers)?;
    for row in &report.table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(meta)? + "\n")?;
    Ok(())
}
