//! Versioned CSV tables: a `# schema=NAME key=value ...` line, a header row,
//! then data rows. Floats are written as `{:.17e}` so they parse back exactly.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

pub const TIMESERIES: (&str, &[&str]) = ("hm3d.timeseries/1", &hm3d::diagnostics::DiagnosticsRecord::COLUMNS);
pub const AUDIT: (&str, &[&str]) = (
    "hm3d.audit/1",
    &["check", "max_residual", "tolerance", "passed", "worst_time", "informational"],
);
pub const INEQUALITIES: (&str, &[&str]) = (
    "hm3d.inequalities/1",
    &["kind", "sample", "lhs", "rhs", "ratio", "factors", "fields"],
);
pub const INEQUALITY_FITS: (&str, &[&str]) = (
    "hm3d.inequality_fits/1",
    &["kind", "count", "max", "median", "p99"],
);
pub const CONVERGENCE: (&str, &[&str]) = ("hm3d.convergence/1", &["m", "n", "w_diff", "u_diff", "total"]);
pub const DEPENDENCE: (&str, &[&str]) = ("hm3d.dependence/1", &["delta", "t", "distance", "log_ratio"]);
pub const DEPENDENCE_FIT: (&str, &[&str]) = ("hm3d.dependence_fit/1", &["delta", "rate", "max_excess"]);

pub fn float(x: f64) -> String {
    format!("{x:.17e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(kind: (&str, &[&str])) -> Self {
        Self {
            schema: kind.0.to_string(),
            meta: Vec::new(),
            columns: kind.1.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e| CliError::io(path, e);
        let mut file = std::fs::File::create(path).map_err(io)?;
        let mut line = format!("# schema={}", self.schema);
        for (k, v) in &self.meta {
            line.push_str(&format!(" {k}={v}"));
        }
        writeln!(file, "{line}").map_err(io)?;
        let mut w = csv::Writer::from_writer(file);
        let csv_err = |e: csv::Error| CliError::Csv { path: path.to_path_buf(), message: e.to_string() };
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }

    /// Reads a table and checks it against the expected schema and columns.
    pub fn read(path: &Path, kind: (&str, &[&str])) -> Result<Self> {
        let bad = |message: String| CliError::Csv { path: PathBuf::from(path), message };
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut reader = BufReader::new(file);
        let mut first = String::new();
        reader.read_line(&mut first).map_err(|e| CliError::io(path, e))?;
        let mut parts = first
            .trim_end()
            .strip_prefix("# ")
            .ok_or_else(|| bad("missing `# schema=...` line".into()))?
            .split(' ');
        let schema = parts
            .next()
            .and_then(|p| p.strip_prefix("schema="))
            .ok_or_else(|| bad("missing schema tag".into()))?
            .to_string();
        if schema != kind.0 {
            return Err(bad(format!("schema `{schema}` is not the expected `{}`", kind.0)));
        }
        let meta = parts
            .map(|p| {
                p.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| bad(format!("malformed metadata `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut r = csv::Reader::from_reader(reader);
        let csv_err = |e: csv::Error| bad(e.to_string());
        let columns: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        if columns != kind.1 {
            return Err(bad(format!("columns {columns:?} do not match {:?}", kind.1)));
        }
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(String::from).collect()).map_err(csv_err))
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Self { schema, meta, columns, rows })
    }

    pub fn meta_map(&self) -> BTreeMap<&str, &str> {
        self.meta.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}
