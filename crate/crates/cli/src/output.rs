//! Tables and summaries, written atomically as CSV or JSON.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => Value::from(*x),
            Cell::Int(n) => Value::from(*n),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
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

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn check_finite(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for (col, cell) in self.columns.iter().zip(row) {
                if let Cell::Num(x) = cell {
                    if !x.is_finite() {
                        bail!("row {i}, column {col}: non-finite value {x}");
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        w.into_inner().context("flushing csv")
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.to_json())).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// Result of one subcommand.
#[derive(Debug, Clone)]
pub struct Output {
    pub name: &'static str,
    pub summary: Value,
    pub table: Table,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn pretty(v: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the requested artifacts and returns their paths.
pub fn emit(out: &Output, dir: &Path, format: Format, table: bool, summary: bool) -> Result<Vec<PathBuf>> {
    out.table.check_finite()?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    match format {
        Format::Csv => {
            if table {
                let p = dir.join(format!("{}.csv", out.name));
                write_atomic(&p, &out.table.to_csv()?)?;
                written.push(p);
            }
            if summary {
                let p = dir.join(format!("{}.summary.json", out.name));
                write_atomic(&p, &pretty(&out.summary)?)?;
                written.push(p);
            }
        }
        Format::Json => {
            let mut obj = Map::new();
            if summary {
                obj.insert("summary".into(), out.summary.clone());
            }
            if table {
                obj.insert("rows".into(), out.table.to_json());
            }
            let p = dir.join(format!("{}.json", out.name));
            write_atomic(&p, &pretty(&Value::Object(obj))?)?;
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["t_s", "label", "ok"]);
        t.push(vec![0.5.into(), "a,b".into(), true.into()]);
        t.push(vec![2.5e-58.into(), "c".into(), false.into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(sample().to_csv().unwrap()).unwrap();
        assert_eq!(text, "t_s,label,ok\n5e-1,\"a,b\",true\n2.5e-58,c,false\n");
    }

    #[test]
    fn json_rows() {
        let v = sample().to_json();
        assert_eq!(v[1]["t_s"], 2.5e-58);
        assert_eq!(v[0]["label"], "a,b");
    }

    #[test]
    fn non_finite_rejected() {
        let mut t = Table::new(&["x"]);
        t.push(vec![f64::NEG_INFINITY.into()]);
        let out = Output { name: "x", summary: Value::Null, table: t };
        let dir = tempfile::tempdir().unwrap();
        assert!(emit(&out, dir.path(), Format::Csv, true, true).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
