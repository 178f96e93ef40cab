//! Tables written as CSV or JSON. Column order is fixed by the command that builds the table.

use std::io::{self, Write};

use serde_json::{Map, Value};

use crate::scaledarith::ScaledComplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Metadata repeated on every row so that any row can be reproduced on its own.
#[derive(Clone, Debug)]
pub struct Meta {
    pub version: &'static str,
    pub seed: Option<u64>,
    pub config_hash: String,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Option<Value>,
    /// in JSON, print only the summary (per-row output would be huge)
    pub json_summary_only: bool,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: None,
            json_summary_only: false,
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, meta: &Meta, format: Format, out: &mut dyn Write) -> io::Result<()> {
        let seed = meta.seed.map_or(Value::Null, Value::from);
        let lead = [
            ("version", Value::from(meta.version)),
            ("seed", seed),
            ("config_hash", Value::from(meta.config_hash.clone())),
        ];
        match format {
            Format::Csv => {
                let header: Vec<&str> = lead.iter().map(|(k, _)| *k).chain(self.columns.iter().copied()).collect();
                writeln!(out, "{}", header.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = lead.iter().map(|(_, v)| csv_cell(v)).chain(row.iter().map(csv_cell)).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
            }
            Format::Json => {
                let mut doc = Map::new();
                if !self.json_summary_only {
                    let rows: Vec<Value> = self
                        .rows
                        .iter()
                        .map(|row| {
                            let mut obj = Map::new();
                            for (k, v) in &lead {
                                obj.insert((*k).to_string(), v.clone());
                            }
                            for (k, v) in self.columns.iter().zip(row) {
                                obj.insert((*k).to_string(), v.clone());
                            }
                            Value::Object(obj)
                        })
                        .collect();
                    doc.insert("rows".into(), Value::Array(rows));
                } else {
                    for (k, v) in &lead {
                        doc.insert((*k).to_string(), v.clone());
                    }
                }
                if let Some(s) = &self.summary {
                    doc.insert("summary".into(), s.clone());
                }
                serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `(re, im, exponent)` with value `(re + i im)·e^exponent`. Values representable as plain floats
/// get exponent 0.
pub fn complex_columns(v: ScaledComplex) -> [Value; 3] {
    let plain = v.to_complex().ok().filter(|z| z.norm() > 1e-300 || v.is_zero());
    let (re, im, e) = match plain {
        Some(z) => (z.re, z.im, 0.0),
        None => (v.mantissa.re, v.mantissa.im, v.exponent),
    };
    [num(re), num(im), num(e)]
}

/// A float cell; non-finite values become empty cells.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
