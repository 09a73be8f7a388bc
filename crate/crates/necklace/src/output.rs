//! CSV and JSON serialisation of reports.
//!
//! Floats in CSV use `{:.16e}` (17 significant digits, round-trip exact);
//! missing values are empty cells. In JSON, missing and non-finite values
//! are `null`.

use std::io::Write;

use serde_json::{Map, Number, Value};

use crate::config::Format;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::F)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::I(v.into())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

/// Rows under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// What a subcommand produces.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Table(Table),
    /// A nested record; CSV output flattens it to `key,value` rows.
    Record(Value),
}

/// `{:.16e}` for finite values, `nan`/`inf`/`-inf` otherwise.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::F(v) => fmt_f64(*v),
        Cell::I(v) => v.to_string(),
        Cell::S(s) => csv_field(s),
        Cell::B(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

/// JSON number, or `null` when not finite.
pub fn num(v: f64) -> Value {
    Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::F(v) => num(*v),
        Cell::I(v) => Value::from(*v),
        Cell::S(s) => Value::from(s.as_str()),
        Cell::B(b) => Value::from(*b),
        Cell::Empty => Value::Null,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::Number(n) => {
            let s = match (n.as_i64(), n.as_f64()) {
                (Some(i), _) => i.to_string(),
                (None, Some(f)) => fmt_f64(f),
                _ => n.to_string(),
            };
            out.push((prefix.to_string(), s));
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
    }
}

/// Serialises a report.
pub fn write_report<W: Write>(w: &mut W, report: &Report, format: Format) -> std::io::Result<()> {
    match (report, format) {
        (Report::Table(t), Format::Csv) => {
            writeln!(w, "{}", t.columns.join(","))?;
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                writeln!(w, "{}", cells.join(","))?;
            }
        }
        (Report::Table(t), Format::Json) => {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|row| {
                    let m: Map<String, Value> =
                        t.columns.iter().zip(row).map(|(c, v)| (c.to_string(), json_cell(v))).collect();
                    Value::Object(m)
                })
                .collect();
            serde_json::to_writer_pretty(&mut *w, &Value::Array(rows))?;
            writeln!(w)?;
        }
        (Report::Record(v), Format::Csv) => {
            let mut pairs = Vec::new();
            flatten("", v, &mut pairs);
            writeln!(w, "key,value")?;
            for (k, v) in pairs {
                writeln!(w, "{},{}", csv_field(&k), csv_field(&v))?;
            }
        }
        (Report::Record(v), Format::Json) => {
            serde_json::to_writer_pretty(&mut *w, v)?;
            writeln!(w)?;
        }
    }
    Ok(())
}
