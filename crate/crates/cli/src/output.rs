//! CSV tables and run manifests.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::error::CliError;

pub const SCHEMA_PREFIX: &str = "# schema: dispersim/";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Seventeen significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// One experiment's result table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub reference_slope: Option<f64>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(schema: &'static str, columns: &[&'static str]) -> Self {
        Self {
            schema,
            reference_slope: None,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn with_reference_slope(mut self, slope: f64) -> Self {
        self.reference_slope = Some(slope);
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn schema_line(&self) -> String {
        let mut line = format!("{SCHEMA_PREFIX}{}/v1", self.schema);
        if let Some(s) = self.reference_slope {
            line.push_str(&format!("; reference_slope: {}", format_float(s)));
        }
        line
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        self.rows
            .iter()
            .map(|r| match &r[idx] {
                Cell::Float(v) => Some(*v),
                Cell::Int(v) => Some(*v as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        writeln!(out, "{}", self.schema_line()).expect("write to memory");
        {
            let mut writer = csv::Writer::from_writer(&mut out);
            writer.write_record(&self.columns).expect("write to memory");
            for row in &self.rows {
                writer
                    .write_record(row.iter().map(Cell::render))
                    .expect("write to memory");
            }
            writer.flush().expect("write to memory");
        }
        String::from_utf8(out).expect("csv is UTF-8")
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.to_csv())
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    File::create(path)
        .and_then(|mut f| f.write_all(contents.as_bytes()))
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub experiment: String,
    pub tool_version: String,
    pub threads: usize,
    pub wall_seconds: f64,
    pub csv: String,
    pub rows: usize,
}

/// A diagnostic that crossed its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub diagnostic: String,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub run: RunInfo,
    pub config: ConfigFile,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, toml::Value>,
    #[serde(default)]
    pub flags: Vec<Flag>,
}

impl Manifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("malformed manifest: {}", e.message())))
    }
}

/// Diagnostics collected while running, with the flags they raise.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub values: BTreeMap<String, toml::Value>,
    pub flags: Vec<Flag>,
}

impl Diagnostics {
    pub fn set(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.values.insert(key.to_owned(), value.into());
    }

    /// Records `value` and flags it when it exceeds `threshold`.
    pub fn bounded(&mut self, key: &str, value: f64, threshold: f64) {
        self.set(key, value);
        if !(value <= threshold) {
            self.flags.push(Flag {
                diagnostic: key.to_owned(),
                value,
                threshold,
            });
        }
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        match self.values.get(key)? {
            toml::Value::Float(v) => Some(*v),
            toml::Value::Integer(v) => Some(*v as f64),
            _ => None,
        }
    }
}
