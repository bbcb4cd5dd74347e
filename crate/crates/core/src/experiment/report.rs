use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::SCHEMA_VERSION;
use crate::error::Result;

/// One named pass/fail check of a command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Shortest round-trip formatting, so reports are byte-stable.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

/// What a command produced before it is written to disk.
#[derive(Clone, Debug)]
pub struct CommandReport {
    pub command: String,
    pub table: Table,
    pub aggregates: Value,
    pub checks: Vec<Check>,
}

impl CommandReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self, config: &impl Serialize, runtime_ms: f64, threads: usize) -> Result<Value> {
        Ok(serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "passed": self.passed(),
            "checks": self.checks,
            "aggregates": self.aggregates,
            "config": serde_json::to_value(config)?,
            "threads": threads,
            "runtime_ms": runtime_ms,
        }))
    }

    /// Writes `report.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path, config: &impl Serialize, runtime_ms: f64, threads: usize) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.table.to_csv_string()?)?;
        let summary = self.summary(config, runtime_ms, threads)?;
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
        Ok(())
    }
}
