use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::Result;
use crate::stats::Estimate;

/// One verification: measured `value` against `target` with tolerance `tol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, target: bound, tol: 0.0, pass: value <= bound }
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, target: bound, tol: 0.0, pass: value >= bound }
    }

    /// Passes when `|value − target| ≤ tol`.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check { name: name.into(), value, target, tol, pass: (value - target).abs() <= tol }
    }

    /// Monte Carlo estimate within `k` standard errors of `target`.
    pub fn estimate(name: impl Into<String>, est: &Estimate, target: f64, k: f64) -> Self {
        Self::within(name, est.mean, target, k * est.stderr)
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, target: 1.0, tol: 0.0, pass: ok }
    }
}

/// Raw rows emitted as CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Wrap an already formatted CSV body whose first line is the header.
    pub fn from_csv(name: &str, csv: &str) -> Self {
        let mut lines = csv.lines();
        let header = lines.next().unwrap_or("").split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Table { name: name.into(), header, rows }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Format a float so that it round-trips.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    /// Wall-clock seconds; left empty unless timing was requested so that
    /// reruns produce identical files.
    pub runtime: Option<f64>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig) -> Self {
        ExperimentReport { config, checks: Vec::new(), tables: Vec::new(), runtime: None }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn checks_table(&self) -> Table {
        let mut t = Table::new("checks", &["name", "value", "target", "tol", "pass"]);
        for c in &self.checks {
            t.push(vec![c.name.clone(), num(c.value), num(c.target), num(c.tol), c.pass.to_string()]);
        }
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Write the report into `dir`. JSON writes `<kind>.json`; CSV writes
/// `<kind>_checks.csv` and one `<kind>_<table>.csv` per raw table.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let kind = report.config.kind.name();
    let mut written = Vec::new();
    match format {
        ReportFormat::Json => {
            let path = dir.join(format!("{kind}.json"));
            fs::write(&path, report.to_json()?)?;
            written.push(path);
        }
        ReportFormat::Csv => {
            for table in std::iter::once(report.checks_table()).chain(report.tables.iter().cloned()) {
                let path = dir.join(format!("{kind}_{}.csv", table.name));
                fs::write(&path, table.to_csv())?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
