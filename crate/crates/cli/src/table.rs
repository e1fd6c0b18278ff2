//! Tabular output with a fixed header and a bit-faithful number format.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::CliError;

pub const SPECTRUM_HEADER: [&str; 4] = ["gamma", "level", "re_omega", "im_omega"];
pub const RIGIDITY_HEADER: [&str; 3] = ["control", "level", "abs_r"];
pub const SPLITTING_HEADER: [&str; 5] = ["epsilon", "pair_a", "pair_b", "split_re", "split_im"];
pub const FITS_HEADER: [&str; 6] = ["quantity", "slope", "intercept", "r_squared", "window_min", "window_max"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(v) => write!(out, "{v}").unwrap(),
            // 17 significant digits round-trip every double.
            Cell::Float(v) => write!(out, "{v:.16e}").unwrap(),
            Cell::Text(s) => out.push_str(s),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        debug_assert!(row.iter().all(|c| !matches!(c, Cell::Float(v) if !v.is_finite())));
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, cell) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }

    /// Rows as an array of objects keyed by the header.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.to_json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_file(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x", "k", "name"]);
        t.push(vec![Cell::Float(0.1), Cell::Int(3), Cell::Text("a".into())]);
        t.push(vec![Cell::Float(-0.375), Cell::Int(0), Cell::Text("b".into())]);
        assert_eq!(t.to_csv(), "x,k,name\n1.0000000000000001e-1,3,a\n-3.7500000000000000e-1,0,b\n");
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn ragged_rows_are_refused() {
        Table::new(&["a", "b"]).push(vec![Cell::Int(1)]);
    }
}
