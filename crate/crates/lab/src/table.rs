//! Result tables: typed rows, machine-checked assertions and run metadata.
//!
//! The CSV form holds the header and rows only and is a pure function of
//! config and seed. Assertions, diagnostics and wall time go to a JSON
//! sidecar next to it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    /// Not estimable (no samples), rendered as `nan`.
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Missing => "nan".into(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Real(v) => Some(*v),
            Cell::Text(_) => None,
            Cell::Missing => Some(f64::NAN),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_nan() {
            Cell::Missing
        } else {
            Cell::Real(v)
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// One machine-checked claim about the table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub config_hash: String,
    pub wall_time_s: f64,
    /// Fitted slopes, anchors and other scalar summaries.
    pub diagnostics: BTreeMap<String, f64>,
    /// Rows or stages that could not be estimated.
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub assertions: Vec<Assertion>,
    pub metadata: Metadata,
}

/// Output formats for [`ResultTable::write`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl ResultTable {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Self {
            experiment: experiment.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            assertions: Vec::new(),
            metadata: Metadata::default(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn assert(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion { name: name.into(), passed, detail: detail.into() });
    }

    pub fn diagnostic(&mut self, name: &str, value: f64) {
        self.metadata.diagnostics.insert(name.into(), value);
    }

    pub fn flag(&mut self, note: impl Into<String>) {
        self.metadata.flags.push(note.into());
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// Values of a numeric column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialises")
    }

    /// Sidecar holding everything but the rows.
    pub fn meta_json(&self) -> String {
        #[derive(Serialize)]
        struct Meta<'a> {
            experiment: &'a str,
            passed: bool,
            assertions: &'a [Assertion],
            metadata: &'a Metadata,
        }
        serde_json::to_string_pretty(&Meta {
            experiment: &self.experiment,
            passed: self.passed(),
            assertions: &self.assertions,
            metadata: &self.metadata,
        })
        .expect("metadata serialises")
    }

    /// Writes `<experiment>.csv` and `<experiment>.meta.json`, or
    /// `<experiment>.json` with everything, into `dir`.
    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| LabError::Io(dir.display().to_string(), e))?;
        let files = match format {
            Format::Csv => vec![
                (dir.join(format!("{}.csv", self.experiment)), self.to_csv()),
                (dir.join(format!("{}.meta.json", self.experiment)), self.meta_json()),
            ],
            Format::Json => vec![(dir.join(format!("{}.json", self.experiment)), self.to_json())],
        };
        for (path, text) in &files {
            std::fs::write(path, text).map_err(|e| LabError::Io(path.display().to_string(), e))?;
        }
        Ok(files.into_iter().map(|f| f.0).collect())
    }

    /// One line per assertion, for terminals.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for a in &self.assertions {
            let tag = if a.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{tag} {}/{}: {}\n", self.experiment, a.name, a.detail));
        }
        s
    }
}
