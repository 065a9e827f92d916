//! Deterministic CSV/JSON writers with a provenance header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::config::Format;
use super::Failure;

/// Tool name, version and config digest stamped on every file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub version: &'static str,
    pub config_sha256: String,
}

impl Header {
    pub fn new(config_sha256: String) -> Self {
        Self { version: env!("CARGO_PKG_VERSION"), config_sha256 }
    }

    fn json(&self) -> Value {
        json!({ "tool": "symtomo", "version": self.version, "config_sha256": self.config_sha256 })
    }
}

/// Named columns of doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub struct Writer {
    pub dir: PathBuf,
    pub format: Format,
    pub header: Header,
}

impl Writer {
    pub fn new(dir: &Path, format: Format, header: Header) -> Result<Self, Failure> {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::config(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), format, header })
    }

    /// Writes `stem.csv` or `stem.json` depending on the configured format.
    pub fn table(&self, stem: &str, table: &Table) -> Result<PathBuf, Failure> {
        match self.format {
            Format::Csv => {
                let mut out = String::new();
                let _ = writeln!(out, "# symtomo {}", self.header.version);
                let _ = writeln!(out, "# config_sha256 {}", self.header.config_sha256);
                out.push_str(&table.columns.join(","));
                out.push('\n');
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                self.write(&format!("{stem}.csv"), &out)
            }
            Format::Json => {
                let doc = json!({
                    "_header": self.header.json(),
                    "columns": table.columns,
                    "rows": table.rows,
                });
                self.json_file(&format!("{stem}.json"), doc)
            }
        }
    }

    /// Writes a JSON report; the header is added as `_header`.
    pub fn report(&self, name: &str, mut body: Value) -> Result<PathBuf, Failure> {
        if let Value::Object(map) = &mut body {
            map.insert("_header".into(), self.header.json());
        }
        self.json_file(name, body)
    }

    fn json_file(&self, name: &str, doc: Value) -> Result<PathBuf, Failure> {
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        text.push('\n');
        self.write(name, &text)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}
