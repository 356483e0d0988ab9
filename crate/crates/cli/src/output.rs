//! Tabular output as CSV (with a config comment line) or JSON.

use std::io::Write;

use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
}

impl Cell {
    /// Twelve significant digits, so text and JSON round the same way.
    fn text(self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v:.11e}"),
        }
    }

    fn json(self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(_) => json!(self.text().parse::<f64>().expect("formatted float")),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn render(config: &RunConfig, table: &Table) -> String {
    match config.format {
        Format::Csv => {
            let mut s = format!("# config: {}\n", serde_json::to_string(config).expect("config serializes"));
            s.push_str(&table.columns.join(","));
            s.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|c| c.text()).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| Value::Array(r.iter().map(|c| c.json()).collect()))
                .collect();
            let doc = json!({ "config": config, "columns": table.columns, "rows": rows });
            let mut s = serde_json::to_string(&doc).expect("document serializes");
            s.push('\n');
            s
        }
    }
}

/// Writes to `--out`, or stdout when no path was given.
pub fn emit(config: &RunConfig, table: &Table) -> Result<(), CliError> {
    let text = render(config, table);
    match &config.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}"))),
    }
}
