//! Report type and emitters.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Echo of the parsed command line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Value,
    pub tolerance: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, value: impl Serialize, tolerance: impl Serialize) -> Self {
        Check {
            name: name.into(),
            passed,
            value: serde_json::to_value(value).unwrap_or(Value::Null),
            tolerance: serde_json::to_value(tolerance).unwrap_or(Value::Null),
        }
    }

    /// A check with no numeric slack.
    pub fn exact(name: impl Into<String>, passed: bool, value: impl Serialize) -> Self {
        Self::new(name, passed, value, Value::Null)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl Report {
    pub fn result(&self, key: &str) -> &Value {
        &self.results[key]
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Rounds a float to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round12).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// The report as a JSON value with every float rounded.
pub fn to_json_value(r: &Report) -> Value {
    let mut v = serde_json::to_value(r).expect("reports serialize");
    round_value(&mut v);
    v
}

fn csv_field(v: &Value) -> String {
    let s = match v {
        Value::Null => return String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

pub fn render(r: &Report, format: Format) -> String {
    let v = to_json_value(r);
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let (columns, rows): (Vec<String>, Vec<Vec<Value>>) = match v.get("table") {
                Some(t) => (
                    serde_json::from_value(t["columns"].clone()).unwrap_or_default(),
                    serde_json::from_value(t["rows"].clone()).unwrap_or_default(),
                ),
                None => {
                    let checks = v["checks"].as_array().cloned().unwrap_or_default();
                    let rows = checks
                        .iter()
                        .map(|c| vec![c["name"].clone(), c["passed"].clone(), c["value"].clone(), c["tolerance"].clone()])
                        .collect();
                    (["name", "passed", "value", "tolerance"].map(String::from).to_vec(), rows)
                }
            };
            let mut out = columns.join(",");
            out.push('\n');
            for row in rows {
                out.push_str(&row.iter().map(csv_field).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            out
        }
    }
}

/// Writes the report to `path`, or standard output when `path` is `None`.
pub fn emit_report(r: &Report, format: Format, path: Option<&Path>) -> anyhow::Result<()> {
    let text = render(r, format);
    match path {
        Some(p) => {
            let mut f = File::create(p).with_context(|| format!("cannot write report to {}", p.display()))?;
            f.write_all(text.as_bytes())?;
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
