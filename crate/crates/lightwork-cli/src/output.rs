//! Table container plus the two serializers (CSV with `#` comment header,
//! pretty JSON). Output is deterministic: no timestamps, shortest round-trip
//! float formatting, metadata in insertion order.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{json, Value};

pub const UNITS: &str = "energy=hbar*omega, entropy=nats, temperature=hbar*omega/k_B";

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Convert a float to a JSON cell. Non-finite values become strings so they
/// survive serialization instead of collapsing to null.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        Value::String("nan".into())
    } else if v > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn text(s: impl Into<String>) -> Value {
    Value::String(s.into())
}

pub struct Table {
    name: String,
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(buf, "# lightwork {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(buf, "# table: {}", self.name)?;
        writeln!(buf, "# units: {UNITS}")?;
        for (k, v) in &self.meta {
            writeln!(buf, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell_str))?;
        }
        Ok(w.into_inner()?)
    }

    fn json_bytes(&self) -> Result<Vec<u8>> {
        let meta: serde_json::Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let doc = json!({
            "tool": "lightwork",
            "version": env!("CARGO_PKG_VERSION"),
            "table": self.name,
            "units": UNITS,
            "meta": meta,
            "columns": self.columns,
            "rows": self.rows,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let bytes = match format {
            Format::Csv => self.csv_bytes()?,
            Format::Json => self.json_bytes()?,
        };
        match out {
            Some(path) => fs::write(path, bytes)
                .with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().write_all(&bytes)?,
        }
        Ok(())
    }
}

fn cell_str(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

/// Write a standalone JSON document (used by `mc-verify`).
pub fn write_json(doc: &Value, out: Option<&Path>) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(doc)?;
    bytes.push(b'\n');
    match out {
        Some(path) => {
            fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}
