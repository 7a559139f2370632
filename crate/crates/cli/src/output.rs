// SPDX-License-Identifier: Apache-2.0

//! Table and matrix writers. Floats use Rust's shortest round-trip formatting, so equal
//! inputs always give byte-identical files.

use std::fs;
use std::path::Path;

use cavity_core::C64;
use serde_json::{json, Value};

use crate::config::SeriesFormat;
use crate::RunError;

/// Column-major table with a header row.
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x}"),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(o: Option<T>) -> Self {
        o.map_or(Cell::Empty, Into::into)
    }
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Table { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Writes `<name>.csv` or `<name>.json`; returns the file name.
    pub fn write(&self, dir: &Path, format: SeriesFormat) -> Result<String, RunError> {
        match format {
            SeriesFormat::Csv => {
                let file = format!("{}.csv", self.name);
                let path = dir.join(&file);
                let mut w = csv::Writer::from_path(&path).map_err(|e| RunError::io(&path, e.into()))?;
                let io = |e: csv::Error| RunError::io(&path, e.into());
                w.write_record(&self.columns).map_err(io)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(Cell::text)).map_err(io)?;
                }
                w.flush().map_err(|e| RunError::io(&path, e))?;
                Ok(file)
            }
            SeriesFormat::Json => {
                let file = format!("{}.json", self.name);
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                write_json(dir, &file, &json!({ "columns": self.columns, "rows": rows }))?;
                Ok(file)
            }
        }
    }
}

pub fn write_json(dir: &Path, file: &str, value: &Value) -> Result<(), RunError> {
    let path = dir.join(file);
    let mut text = serde_json::to_string_pretty(value).expect("plain JSON values serialize");
    text.push('\n');
    fs::write(&path, text).map_err(|e| RunError::io(&path, e))
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// {"re": [[..]], "im": [[..]]} with nulls for undefined entries.
pub fn complex_matrix(m: &[Vec<Option<C64>>]) -> Value {
    let part = |f: fn(&C64) -> f64| -> Value {
        m.iter().map(|row| row.iter().map(|c| c.as_ref().map_or(Value::Null, |c| num(f(c)))).collect::<Value>()).collect()
    };
    json!({ "re": part(|c| c.re), "im": part(|c| c.im) })
}

pub fn real_matrix(m: &[Vec<Option<f64>>]) -> Value {
    m.iter().map(|row| row.iter().map(|x| x.map_or(Value::Null, num)).collect::<Value>()).collect()
}
