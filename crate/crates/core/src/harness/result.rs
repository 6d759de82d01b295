use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) if *v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&v.abs()) => write!(f, "{v:e}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "pass" } else { "fail" }.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Values of a numeric column.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.columns.iter().position(|c| c == name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match &r[i] {
                Cell::Float(v) => Some(*v),
                Cell::Int(v) => Some(*v as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }

    pub fn to_csv(&self, header_comment: &str) -> String {
        let mut out = format!("# {header_comment}\n{}\n", self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Outcome of one embedded check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, measured: f64, threshold: f64) -> Self {
        Self { name: name.into(), passed, measured, threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Extra JSON outputs, written as `<name>.json`.
    pub artifacts: Vec<(String, serde_json::Value)>,
    /// Modeling choices not fixed by the scenario description.
    pub assumptions: Vec<String>,
}

impl ExperimentResult {
    pub fn new(experiment: &str, config_hash: String, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            config_hash,
            seed,
            tables: Vec::new(),
            checks: Vec::new(),
            artifacts: Vec::new(),
            assumptions: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn header(&self) -> String {
        format!("config_hash={} seed={}", self.config_hash, self.seed)
    }

    pub fn checks_table(&self) -> Table {
        let mut t = Table::new(&format!("{}_checks", self.experiment), &["check", "measured", "threshold", "result"]);
        for c in &self.checks {
            t.push(vec![c.name.as_str().into(), c.measured.into(), c.threshold.into(), c.passed.into()]);
        }
        t
    }

    /// Writes every table as CSV, the artifacts as JSON and a `.meta.json`
    /// sidecar. Only the sidecar carries a timestamp, so the other files are
    /// identical across runs with the same configuration and seed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let header = self.header();
        let mut written = Vec::new();
        for t in self.tables.iter().chain(std::iter::once(&self.checks_table())) {
            let path = dir.join(format!("{}.csv", t.name));
            fs::write(&path, t.to_csv(&header))?;
            written.push(path);
        }
        for (name, value) in &self.artifacts {
            let path = dir.join(format!("{name}.json"));
            fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
            written.push(path);
        }
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = serde_json::json!({
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "timestamp_unix_s": timestamp,
            "all_checks_passed": self.all_passed(),
            "assumptions": self.assumptions,
            "files": written.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy()).collect::<Vec<_>>(),
        });
        let path = dir.join(format!("{}.meta.json", self.experiment));
        fs::write(&path, serde_json::to_string_pretty(&meta)? + "\n")?;
        written.push(path);
        Ok(written)
    }
}
