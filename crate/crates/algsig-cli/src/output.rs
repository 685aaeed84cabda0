use std::io::Write;

use serde_json::{Map, Value};

use crate::config::{Format, SweepConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(u64::from(v))
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, mut row: Vec<Cell>) {
        row.resize(self.header.len(), Cell::Empty);
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    Value::Object(self.header.iter().cloned().zip(r.iter().map(Cell::json)).collect::<Map<_, _>>())
                })
                .collect(),
        )
    }
}

/// What a command writes: a table, and optionally a richer JSON document
/// used in place of the table's JSON rendering.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub table: Table,
    pub json: Option<Value>,
}

impl From<Table> for Artifact {
    fn from(table: Table) -> Self {
        Artifact { table, json: None }
    }
}

impl Artifact {
    fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.table.header)?;
                for row in &self.table.rows {
                    w.write_record(row.iter().map(Cell::text))?;
                }
                w.into_inner().map_err(|e| CliError::io("CSV buffer", std::io::Error::other(e.to_string())))
            }
            Format::Json => {
                let doc = self.json.clone().unwrap_or_else(|| self.table.to_json());
                let mut out = serde_json::to_vec_pretty(&doc)?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }

    pub fn write(&self, cfg: &SweepConfig) -> Result<()> {
        let bytes = self.render(cfg.format)?;
        match &cfg.output {
            Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(path.display().to_string(), e)),
            None => std::io::stdout().lock().write_all(&bytes).map_err(|e| CliError::io("standard output", e)),
        }
    }
}
