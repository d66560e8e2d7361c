//! Result tables and their JSON/CSV encodings.
//!
//! JSON: `{"meta": {...}, "data": {"rows": [...], ...extra}}`. CSV carries the
//! row table only, one header line, floats as `{:.16e}` (17 significant
//! digits, round-trip exact).

use crate::config::Format;
use serde_json::{Map, Value};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
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

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        self.rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(Cell::to_json))
                    .collect();
                Value::Object(obj)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub meta: Map<String, Value>,
    pub rows: Table,
    pub extra: Map<String, Value>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut data = Map::new();
        data.insert("rows".into(), self.rows.to_json());
        for (k, v) in &self.extra {
            data.insert(k.clone(), v.clone());
        }
        let mut top = Map::new();
        top.insert("meta".into(), Value::Object(self.meta.clone()));
        top.insert("data".into(), Value::Object(data));
        Value::Object(top)
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> anyhow::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &self.to_json())?;
                writeln!(w)?;
            }
            Format::Csv => {
                let mut csv = csv::Writer::from_writer(w);
                csv.write_record(&self.rows.columns)?;
                for r in &self.rows.rows {
                    csv.write_record(r.iter().map(Cell::to_csv))?;
                }
                csv.flush()?;
            }
        }
        Ok(())
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> anyhow::Result<()> {
        use anyhow::Context;
        match out {
            Some(path) => {
                let f = std::fs::File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?;
                self.write(format, std::io::BufWriter::new(f))
            }
            None => self.write(format, std::io::stdout().lock()),
        }
    }
}
