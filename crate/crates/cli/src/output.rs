use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::{CliError, Command};

/// A CSV table: header row plus string cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Index of a header column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell of the first row whose `key` column equals `value`.
    pub fn lookup(&self, key: &str, value: &str, col: &str) -> Option<&str> {
        let (k, c) = (self.column(key)?, self.column(col)?);
        self.rows.iter().find(|r| r[k] == value).map(|r| r[c].as_str())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// One assertion evaluated by a command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// Assertions and tables produced by one command.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub command: Command,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub results: Value,
}

impl Outcome {
    pub fn new(command: Command) -> Self {
        Outcome { command, checks: Vec::new(), tables: Vec::new(), results: json!({}) }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn set(&mut self, key: &str, v: impl Serialize) {
        if let Value::Object(m) = &mut self.results {
            m.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
        }
    }

    fn file_name(&self, t: &Table) -> String {
        format!("{}-{}.csv", self.command.name(), t.name)
    }

    /// CSV bytes of every table, keyed by file name.
    pub fn csv_files(&self) -> Result<Vec<(String, Vec<u8>)>, CliError> {
        self.tables.iter().map(|t| Ok((self.file_name(t), t.to_csv()?))).collect()
    }

    /// The JSON summary embedding the resolved config and its hash.
    pub fn summary(&self, cfg: &ExperimentConfig) -> Result<Value, CliError> {
        let config = serde_json::to_value(cfg).map_err(|e| CliError::Io(e.to_string()))?;
        let artifacts: Vec<Value> = self
            .csv_files()?
            .into_iter()
            .map(|(f, bytes)| json!({ "file": f, "sha256": sha256_hex(&bytes) }))
            .collect();
        Ok(json!({
            "command": self.command.name(),
            "passed": self.passed(),
            "config": config,
            "config_sha256": config_hash(cfg)?,
            "checks": self.checks,
            "results": self.results,
            "artifacts": artifacts,
        }))
    }

    /// Writes every CSV table and the JSON summary into `dir`.
    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(io)?;
        let mut out = Vec::new();
        for (name, bytes) in self.csv_files()? {
            let p = dir.join(name);
            fs::write(&p, bytes).map_err(io)?;
            out.push(p);
        }
        let p = dir.join(format!("{}.json", self.command.name()));
        let text = serde_json::to_string_pretty(&self.summary(cfg)?).map_err(|e| CliError::Io(e.to_string()))?;
        fs::write(&p, text + "\n").map_err(io)?;
        out.push(p);
        Ok(out)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical JSON serialisation of the config.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(cfg).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(sha256_hex(&bytes))
}

/// Shortest round-trip representation, so equal values give equal bytes.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}
