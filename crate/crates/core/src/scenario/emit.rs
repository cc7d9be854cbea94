//! CSV and JSON renderings of a sweep.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

use super::sweep::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::config("--format", format!("unknown format `{other}` (csv or json)"))),
        }
    }
}

/// 17 significant digits: enough to round-trip every f64.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    let branches = result.has_branches();
    let mut header = Vec::new();
    if branches {
        header.push("branch");
    }
    header.extend(result.metadata.columns.iter().map(String::as_str));
    writeln!(out, "{}", header.join(","))?;
    for row in &result.rows {
        let mut fields = Vec::with_capacity(row.values.len() + 1);
        if branches {
            fields.push(row.branch.clone().unwrap_or_default());
        }
        fields.extend(row.values.iter().map(|v| format_value(*v)));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// `{"metadata": {...}, "records": [{column: value, ...}, ...]}`; non-finite
/// values become `null`.
pub fn to_json(result: &SweepResult) -> Value {
    let records: Vec<Value> = result
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            if let Some(b) = &row.branch {
                m.insert("branch".into(), Value::String(b.clone()));
            }
            for (name, v) in result.metadata.columns.iter().zip(&row.values) {
                m.insert(name.clone(), serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number));
            }
            Value::Object(m)
        })
        .collect();
    json!({ "metadata": result.metadata, "records": records })
}

pub fn write_json<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &to_json(result)).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// Write to `destination`, or to standard output when it is `None`.
pub fn emit_table(result: &SweepResult, format: Format, destination: Option<&Path>) -> Result<()> {
    let mut buffer = Vec::new();
    match format {
        Format::Csv => write_csv(result, &mut buffer)?,
        Format::Json => write_json(result, &mut buffer)?,
    }
    match destination {
        Some(path) => std::fs::write(path, buffer)?,
        None => std::io::stdout().lock().write_all(&buffer)?,
    }
    Ok(())
}
