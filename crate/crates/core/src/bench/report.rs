//! Bench results: named checks, CSV tables and a fingerprint of the
//! configuration that produced them.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    /// Floats use the shortest representation that round-trips.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) => write!(f, "{x:?}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    /// Header row, then one record per row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub name: String,
    /// Parameters in the order they were given.
    pub config: Vec<(String, String)>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    /// Wall time; never written to CSV, so reruns stay byte-identical.
    pub runtime: Duration,
}

impl BenchReport {
    pub fn new<K: ToString, V: ToString>(name: &str, config: impl IntoIterator<Item = (K, V)>) -> Self {
        BenchReport {
            name: name.to_string(),
            config: config
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            checks: Vec::new(),
            tables: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    /// SHA-256 of the `key=value` lines of the configuration.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.name.as_bytes());
        h.update(b"\n");
        for (k, v) in &self.config {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex(&h.finalize())
    }

    /// Passes iff `value ≤ tol`; NaN fails.
    pub fn check_le(&mut self, name: impl Into<String>, value: f64, tol: f64) -> bool {
        let passed = value <= tol;
        self.checks.push(Check {
            name: name.into(),
            value,
            tol,
            passed,
        });
        passed
    }

    /// A check decided by the caller; `value` is recorded for context.
    pub fn check_that(&mut self, name: impl Into<String>, passed: bool, value: f64, tol: f64) -> bool {
        self.checks.push(Check {
            name: name.into(),
            value,
            tol,
            passed,
        });
        passed
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Appends the checks and tables of `other`, prefixing its names.
    pub fn absorb(&mut self, other: BenchReport) {
        let prefix = other.name;
        self.checks.extend(other.checks.into_iter().map(|mut c| {
            c.name = format!("{prefix}/{}", c.name);
            c
        }));
        self.tables.extend(other.tables.into_iter().map(|mut t| {
            t.name = format!("{prefix}_{}", t.name);
            t
        }));
        self.runtime += other.runtime;
    }

    pub fn checks_table(&self) -> Table {
        let mut t = Table::new("checks", &["check", "value", "tol", "passed", "config_hash"]);
        let hash = self.config_hash();
        for c in &self.checks {
            t.push(vec![
                c.name.clone().into(),
                c.value.into(),
                c.tol.into(),
                c.passed.into(),
                hash.clone().into(),
            ]);
        }
        t
    }

    /// Writes `<name>_checks.csv` and one `<name>_<table>.csv` per table;
    /// returns the paths in that order.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        let checks = self.checks_table();
        for t in std::iter::once(&checks).chain(&self.tables) {
            let path = dir.join(format!("{}_{}.csv", self.name, t.name));
            t.write_csv(&path)?;
            out.push(path);
        }
        Ok(out)
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}/{}: {:e} (tol {:e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    self.name,
                    c.name,
                    c.value,
                    c.tol
                )
            })
            .collect()
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_csv_text() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 5e-324] {
            let s = Cell::Float(x).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn hash_depends_on_config_only() {
        let mut a = BenchReport::new("x", [("n", "3"), ("seed", "1")]);
        let b = BenchReport::new("x", [("n", "3"), ("seed", "1")]);
        a.check_le("c", 1.0, 0.5);
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), BenchReport::new("x", [("n", "4")]).config_hash());
        assert!(!a.passed());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn csv_files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = BenchReport::new("demo", [("k", 1)]);
        r.check_le("ok", 0.0, 1.0);
        let mut t = Table::new("rows", &["a", "b"]);
        t.push(vec![1usize.into(), 0.25.into()]);
        r.tables.push(t);
        let files = r.write_csv(dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let text = std::fs::read_to_string(&files[1]).unwrap();
        assert_eq!(text, "a,b\n1,0.25\n");
    }
}
