//! Command results and their text, JSON and CSV renderings.

use std::fmt::Write as _;

use clap::ValueEnum;
use rademacher_core::mpnum::BigReal;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Failure = 1,
    Usage = 2,
    Mismatch = 3,
    Uncertified = 4,
}

/// Scalar fields, an optional table of rows, and a human summary.
#[derive(Debug, Default)]
pub struct Report {
    pub fields: Map<String, Value>,
    pub rows_key: Option<&'static str>,
    pub rows: Vec<Map<String, Value>>,
    pub text: String,
    pub status: Option<Status>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn field(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.insert(key.to_string(), value.into());
        self
    }

    pub fn rows(&mut self, key: &'static str, rows: Vec<Map<String, Value>>) -> &mut Self {
        self.rows_key = Some(key);
        self.rows = rows;
        self
    }

    pub fn line(&mut self, line: impl AsRef<str>) -> &mut Self {
        self.text.push_str(line.as_ref());
        self.text.push('\n');
        self
    }

    /// Keeps the worse of the current and the given status.
    pub fn fail(&mut self, status: Status) -> &mut Self {
        self.status = Some(self.status().max(status));
        self
    }

    pub fn status(&self) -> Status {
        self.status.unwrap_or(Status::Ok)
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        Ok(match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                let mut doc = self.fields.clone();
                if let Some(key) = self.rows_key {
                    doc.insert(key.to_string(), Value::Array(self.rows.iter().cloned().map(Value::Object).collect()));
                }
                let mut text = serde_json::to_string_pretty(&Value::Object(doc))?;
                text.push('\n');
                text
            }
            Format::Csv => {
                let mut writer = csv::Writer::from_writer(Vec::new());
                let records: Vec<&Map<String, Value>> =
                    if self.rows_key.is_some() { self.rows.iter().collect() } else { vec![&self.fields] };
                if let Some(first) = records.first() {
                    writer.write_record(first.keys())?;
                }
                for record in records {
                    writer.write_record(record.values().map(csv_cell))?;
                }
                String::from_utf8(writer.into_inner()?)?
            }
        })
    }
}

fn csv_cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(csv_cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

/// Builds a row from `(key, value)` pairs, keeping their order.
pub fn row<const N: usize>(pairs: [(&str, Value); N]) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn string(x: impl ToString) -> Value {
    Value::String(x.to_string())
}

/// Positional decimal with every digit the precision carries.
pub fn real(x: &BigReal) -> Value {
    Value::String(x.to_decimal_string())
}

/// Shortest exact decimal, scientific for small magnitudes.
pub fn sci(x: &BigReal) -> Value {
    Value::String(x.as_float().to_string_radix(10, None))
}

pub fn float(x: f64) -> Value {
    Value::String(format!("{x:e}"))
}

pub fn opt(x: Option<u32>) -> Value {
    x.map_or(Value::Null, string)
}

/// Text helper: `label: value` lines with aligned labels.
pub fn kv(out: &mut String, pairs: &[(&str, String)]) {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in pairs {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
}
