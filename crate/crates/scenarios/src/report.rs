//! Run reports, CSV formatting and file output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Passes when `value ≤ threshold`.
    Le,
    /// Passes when `value ≥ threshold`.
    Ge,
    /// Passes when `value == threshold`; used for counts.
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn le(value: f64, threshold: f64) -> Self {
        Self { value, threshold, comparison: Comparison::Le, pass: value <= threshold }
    }

    pub fn ge(value: f64, threshold: f64) -> Self {
        Self { value, threshold, comparison: Comparison::Ge, pass: value >= threshold }
    }

    pub fn eq(value: f64, threshold: f64) -> Self {
        Self { value, threshold, comparison: Comparison::Eq, pass: value == threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    /// Relative to the run directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub kind: String,
    pub checks: BTreeMap<String, Check>,
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub failed: Vec<String>,
    pub files: Vec<FileEntry>,
    pub duration_seconds: f64,
}

impl RunReport {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            checks: BTreeMap::new(),
            metrics: BTreeMap::new(),
            warnings: Vec::new(),
            failed: Vec::new(),
            files: Vec::new(),
            duration_seconds: 0.0,
        }
    }

    pub fn check(&mut self, name: &str, check: Check) {
        if !check.pass {
            self.failed.push(name.into());
        }
        self.checks.insert(name.into(), check);
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }

    /// The report as pretty JSON without `duration_seconds`; identical
    /// configs give identical payloads.
    pub fn payload(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("duration_seconds");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-4, 1e12)`. Negative zero prints as `0`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: String,
    rows: Vec<String>,
}

impl Table {
    pub fn new(name: &str, header: &str) -> Self {
        Self { name: name.into(), header: header.into(), rows: Vec::new() }
    }

    /// Integer identifiers go first, numbers after.
    pub fn row(&mut self, ids: &[usize], values: &[f64]) {
        let mut cells: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
        cells.extend(values.iter().map(|v| fmt_num(*v)));
        self.rows.push(cells.join(","));
    }

    /// Numbers first, then integer identifiers, then more numbers.
    pub fn row_split(&mut self, head: &[f64], ids: &[usize], tail: &[f64]) {
        let mut cells: Vec<String> = head.iter().map(|v| fmt_num(*v)).collect();
        cells.extend(ids.iter().map(|i| i.to_string()));
        cells.extend(tail.iter().map(|v| fmt_num(*v)));
        self.rows.push(cells.join(","));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.header.len() + 1 + self.rows.iter().map(|r| r.len() + 1).sum::<usize>());
        out.push_str(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ScenarioError> {
    fs::write(path, bytes).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })
}

/// Writes the tables and `report.json` into `dir` and fills in the
/// report's file manifest. Returns the manifest.
pub fn write_outputs(dir: &Path, tables: &[Table], report: &mut RunReport) -> Result<Vec<FileEntry>, ScenarioError> {
    fs::create_dir_all(dir).map_err(|source| ScenarioError::Io { path: dir.to_path_buf(), source })?;
    report.files.clear();
    for t in tables {
        let body = t.render();
        write_file(&dir.join(&t.name), body.as_bytes())?;
        report.files.push(FileEntry { path: t.name.clone(), sha256: sha256_hex(body.as_bytes()) });
    }
    let mut json = report.to_json();
    json.push('\n');
    write_file(&dir.join(REPORT_FILE), json.as_bytes())?;
    Ok(report.files.clone())
}

pub const REPORT_FILE: &str = "report.json";

/// Path of the report inside a run directory.
pub fn report_path(dir: &Path) -> PathBuf {
    dir.join(REPORT_FILE)
}
