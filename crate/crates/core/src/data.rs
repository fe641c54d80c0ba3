//! Rectangular numeric data frames and their canonical serialization.
//!
//! The canonical form is the byte string fed to provenance hashing:
//!
//! ```text
//! T,Y,query_volume
//! 1,3.25,51.2
//! 0,-0.5,47
//! ```
//!
//! UTF-8; the first line holds the comma-joined column names; each following
//! line holds one row in generation order; floats use the shortest decimal
//! that round-trips; lines are separated by `\n` with no trailing newline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataFrame {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl DataFrame {
    /// Builds a frame, checking that it is rectangular and finite.
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let frame = DataFrame { columns, rows };
        frame.check_shape()?;
        Ok(frame)
    }

    /// Builds a frame from equal-length columns.
    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let n = columns.first().map_or(0, |(_, c)| c.len());
        if columns.iter().any(|(_, c)| c.len() != n) {
            return Err(Error::Frame("columns have different lengths".into()));
        }
        let names = columns.iter().map(|(name, _)| name.clone()).collect();
        let rows = (0..n).map(|i| columns.iter().map(|(_, c)| c[i]).collect()).collect();
        DataFrame::new(names, rows)
    }

    fn check_shape(&self) -> Result<()> {
        if self.columns.is_empty() {
            return Err(Error::Frame("no columns".into()));
        }
        for (i, name) in self.columns.iter().enumerate() {
            if name.is_empty() || name.contains([',', '\n', '\r']) {
                return Err(Error::Frame(format!("illegal column name {name:?}")));
            }
            if self.columns[..i].contains(name) {
                return Err(Error::Frame(format!("duplicate column `{name}`")));
            }
        }
        let width = self.columns.len();
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Frame(format!(
                    "row {r} has {} values, expected {width}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Frame(format!("row {r} holds non-finite value {v}")));
            }
        }
        Ok(())
    }

    /// Checks that `name` is a binary {0, 1} column.
    pub fn check_binary(&self, name: &str) -> Result<()> {
        let idx = self.require(name)?;
        match self.rows.iter().find(|row| row[idx] != 0.0 && row[idx] != 1.0) {
            Some(row) => Err(Error::Frame(format!(
                "column `{name}` must be binary, found {}",
                row[idx]
            ))),
            None => Ok(()),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::Frame(format!("missing column `{name}`")))
    }

    /// Copies one column out.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.index_of(name)?;
        Some(self.rows.iter().map(|row| row[idx]).collect())
    }

    /// Returns a copy with rows `a` and `b` swapped.
    pub fn with_rows_swapped(&self, a: usize, b: usize) -> DataFrame {
        let mut out = self.clone();
        out.rows.swap(a, b);
        out
    }

    /// The canonical serialization described in the module docs.
    pub fn canonical_string(&self) -> String {
        let mut out = self.columns.join(",");
        for row in &self.rows {
            out.push('\n');
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                // `Display` for f64 is the shortest representation that
                // parses back to the same bits.
                out.push_str(&v.to_string());
            }
        }
        out
    }

    /// Parses the canonical serialization. Accepts any well-formed CSV of
    /// numbers with a header, but only canonical input hashes to the
    /// digest of the frame it encodes.
    pub fn parse_canonical(text: &str) -> Result<Self> {
        let mut lines = text.split('\n');
        let header = lines
            .next()
            .filter(|h| !h.is_empty())
            .ok_or_else(|| Error::Frame("empty input".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_owned).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|cell| {
                    cell.parse::<f64>()
                        .map_err(|_| Error::Frame(format!("line {}: bad number {cell:?}", i + 2)))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        DataFrame::new(columns, rows)
    }
}
