//! Tabular suite output and its CSV / JSON serialization.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Result, VpmError};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    /// Reals carry 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) if x.is_nan() => "nan".into(),
            Cell::Real(x) if x.is_infinite() => {
                if *x > 0.0 {
                    "inf".into()
                } else {
                    "-inf".into()
                }
            }
            Cell::Real(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

/// Run identity carried by every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp_unix: u64,
}

impl Metadata {
    pub fn new(config_hash: String, seed: u64) -> Self {
        let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Metadata { config_hash, seed, tool_version: env!("CARGO_PKG_VERSION").to_string(), timestamp_unix }
    }
}

/// Rows of one suite plus its verdict and measured constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub suite: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Metadata,
    pub passed: bool,
    pub constants: BTreeMap<String, f64>,
    /// Human-readable reasons for failures and skipped checks.
    pub notes: Vec<String>,
}

fn p_rank(cell: &Cell) -> f64 {
    match cell {
        Cell::Text(s) if s == "inf" => f64::INFINITY,
        Cell::Text(s) => s.parse().unwrap_or(f64::NAN),
        other => other.as_f64().unwrap_or(f64::NAN),
    }
}

impl ExperimentReport {
    pub fn new(suite: &str, columns: &[&str], metadata: Metadata) -> Self {
        ExperimentReport {
            suite: suite.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata,
            passed: true,
            constants: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column, `None` for text cells.
    pub fn values(&self, name: &str) -> Vec<Option<f64>> {
        match self.column(name) {
            Some(i) => self.rows.iter().map(|r| r[i].as_f64()).collect(),
            None => Vec::new(),
        }
    }

    pub fn fail(&mut self, note: impl Into<String>) {
        self.passed = false;
        self.notes.push(note.into());
    }

    /// Stable sort by `(function_id, p, n, k)`, skipping absent columns.
    pub fn sort_rows(&mut self) {
        let f = self.column("function_id");
        let p = self.column("p");
        let n = self.column("n");
        let k = self.column("k");
        let num = |r: &Vec<Cell>, i: Option<usize>| i.and_then(|i| r[i].as_f64()).unwrap_or(0.0);
        self.rows.sort_by(|a, b| {
            let fa = f.map(|i| a[i].render()).unwrap_or_default();
            let fb = f.map(|i| b[i].render()).unwrap_or_default();
            fa.cmp(&fb)
                .then_with(|| {
                    let pa = p.map(|i| p_rank(&a[i])).unwrap_or(0.0);
                    let pb = p.map(|i| p_rank(&b[i])).unwrap_or(0.0);
                    pa.total_cmp(&pb)
                })
                .then_with(|| num(a, n).total_cmp(&num(b, n)))
                .then_with(|| num(a, k).total_cmp(&num(b, k)))
        });
    }

    /// Header line and rows, without any metadata.
    pub fn csv_table(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| VpmError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| VpmError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| VpmError::Io(e.to_string()))
    }

    /// Everything except the timestamp line: reproducible across identical runs.
    pub fn csv_body(&self) -> Result<String> {
        Ok(format!(
            "# suite={} config_hash={} seed={} tool_version={}\n{}",
            self.suite,
            self.metadata.config_hash,
            self.metadata.seed,
            self.metadata.tool_version,
            self.csv_table()?
        ))
    }

    /// Full file contents: the body's metadata line, a timestamp line, then the table.
    pub fn to_csv(&self) -> Result<String> {
        let body = self.csv_body()?;
        let (meta, table) = body.split_once('\n').unwrap_or((&body, ""));
        Ok(format!("{meta}\n# timestamp_unix={}\n{table}", self.metadata.timestamp_unix))
    }
}

/// Strip `# timestamp...` lines from a CSV produced by [`ExperimentReport::to_csv`].
pub fn strip_timestamp(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with("# timestamp")).map(|l| format!("{l}\n")).collect()
}

/// Write through a temporary sibling file and rename into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| VpmError::Io(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
