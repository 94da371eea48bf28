//! Result tables, CSV and metadata persistence.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::config::{Driver, ExperimentConfig};

/// One CSV field.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // 17 significant digits round-trip every f64.
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
        }
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::Float(v) => Some(v),
            _ => None,
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Named table with a fixed column schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match schema of `{}`", self.name);
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    /// Rows whose text column `key` equals `value`.
    pub fn filter(&self, key: &str, value: &str) -> Vec<&Vec<Cell>> {
        let Some(i) = self.column_index(key) else { return Vec::new() };
        self.rows.iter().filter(|r| matches!(&r[i], Cell::Text(s) if s == value)).collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Sibling metadata for every CSV; deliberately free of timestamps and
/// thread counts so repeated runs are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct TableMetadata<'a> {
    pub driver: &'a str,
    pub table: &'a str,
    pub columns: &'a [String],
    pub rows: usize,
    pub seed: u64,
    pub version: String,
    pub config: &'a ExperimentConfig,
}

/// Library version in `v<semver>` form.
pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// Writes `<name>.csv` and `<name>.json` per table plus the resolved
/// `config.toml` into `dir`. Returns the CSV paths.
pub fn write_report(dir: &Path, driver: Driver, cfg: &ExperimentConfig, tables: &[ResultTable]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    let mut paths = Vec::with_capacity(tables.len());
    for t in tables {
        let csv_path = dir.join(format!("{}.csv", t.name));
        fs::write(&csv_path, t.to_csv()?)?;
        let meta = TableMetadata {
            driver: driver.name(),
            table: &t.name,
            columns: &t.columns,
            rows: t.rows.len(),
            seed: cfg.seed,
            version: version_string(),
            config: cfg,
        };
        let mut json = serde_json::to_string_pretty(&meta)?;
        json.push('\n');
        fs::write(dir.join(format!("{}.json", t.name)), json)?;
        paths.push(csv_path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_formatting() {
        let mut t = ResultTable::new("demo", &["trial", "rate", "scheme", "collapsed"]);
        t.push(vec![3usize.into(), 0.1.into(), "zf".into(), false.into()]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "trial,rate,scheme,collapsed\n3,1.0000000000000001e-1,zf,false\n");
        assert_eq!("1.0000000000000001e-1".parse::<f64>().unwrap(), 0.1);
        assert_eq!(t.column("rate").unwrap(), vec![0.1]);
        assert!(t.column("scheme").is_none());
        assert_eq!(t.filter("scheme", "zf").len(), 1);
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn rejects_ragged_rows() {
        ResultTable::new("demo", &["a", "b"]).push(vec![1usize.into()]);
    }
}
