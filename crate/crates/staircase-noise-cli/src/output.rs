//! Output records and the text/JSON/CSV renderers.
//!
//! Every command emits one or more records of the shape
//! `{inputs, results, metadata}`. JSON serializes them as-is (full float
//! precision, so a record can be re-evaluated bit-for-bit); CSV flattens
//! inputs and results into columns and leaves metadata out; text rendering
//! is command-specific and built by the command itself.

use serde_json::{Map, Value};

use crate::cli::OutputFormat;

#[derive(Debug, Clone, Default)]
pub struct OutputRecord {
    pub inputs: Vec<(String, Value)>,
    pub results: Vec<(String, Value)>,
}

impl OutputRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.inputs.push((key.to_string(), value.into()));
        self
    }

    pub fn result(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.results.push((key.to_string(), value.into()));
        self
    }
}

/// Format a float with a fixed number of decimals, trimming trailing zeros
/// but keeping at least one digit after the point: 1.124260 -> "1.12426",
/// 1.000000 -> "1.0".
pub fn format_value(value: f64, decimals: usize) -> String {
    let mut s = format!("{value:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.push('0');
        }
    }
    s
}

fn pairs_to_map(pairs: &[(String, Value)]) -> Value {
    let mut map = Map::new();
    for (key, value) in pairs {
        map.insert(key.clone(), value.clone());
    }
    Value::Object(map)
}

fn metadata() -> Value {
    let mut map = Map::new();
    map.insert(
        "version".to_string(),
        Value::from(env!("CARGO_PKG_VERSION")),
    );
    map.insert(
        "timestamp".to_string(),
        Value::from(chrono::Utc::now().to_rfc3339()),
    );
    Value::Object(map)
}

fn record_to_json(record: &OutputRecord, meta: &Value) -> Value {
    let mut map = Map::new();
    map.insert("inputs".to_string(), pairs_to_map(&record.inputs));
    map.insert("results".to_string(), pairs_to_map(&record.results));
    map.insert("metadata".to_string(), meta.clone());
    Value::Object(map)
}

fn render_json(records: &[OutputRecord], multi: bool) -> String {
    let meta = metadata();
    let value = if multi {
        Value::Array(records.iter().map(|r| record_to_json(r, &meta)).collect())
    } else {
        record_to_json(&records[0], &meta)
    };
    let mut s = serde_json::to_string_pretty(&value).expect("records are plain JSON values");
    s.push('\n');
    s
}

fn csv_cell(value: &Value, precision: Option<usize>) -> String {
    match value {
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (None, Some(i), _) => i.to_string(),
            (None, None, Some(f)) => match precision {
                Some(decimals) => format_value(f, decimals),
                None => format!("{f}"),
            },
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Array(items) => items
            .iter()
            .map(|v| csv_cell(v, precision))
            .collect::<Vec<_>>()
            .join(";"),
        Value::Null => String::new(),
        Value::Object(_) => String::new(),
    }
}

fn render_csv(records: &[OutputRecord], precision: Option<usize>) -> String {
    let mut columns: Vec<String> = Vec::new();
    for record in records {
        for (key, _) in record.inputs.iter().chain(record.results.iter()) {
            if !columns.contains(key) {
                columns.push(key.clone());
            }
        }
    }

    let mut out = columns.join(",");
    out.push('\n');
    for record in records {
        let row: Vec<String> = columns
            .iter()
            .map(|column| {
                record
                    .inputs
                    .iter()
                    .chain(record.results.iter())
                    .find(|(key, _)| key == column)
                    .map(|(_, value)| csv_cell(value, precision))
                    .unwrap_or_default()
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn render(
    records: &[OutputRecord],
    text: &str,
    format: OutputFormat,
    precision: Option<usize>,
    multi: bool,
) -> String {
    match format {
        OutputFormat::Text => text.to_string(),
        OutputFormat::Json => render_json(records, multi),
        OutputFormat::Csv => render_csv(records, precision),
    }
}
