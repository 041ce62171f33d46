//! Report rendering: human-readable text, JSON and `key,value` CSV.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

/// Fixed-point rendering with `precision` fractional digits. Exact ties
/// round half to even (the standard library formatter rounds the exact
/// binary value that way).
pub fn fixed(x: f64, precision: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    let s = format!("{x:.precision$}");
    // avoid "-0.000" for tiny negatives
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn scalar(v: &Value, precision: usize) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Bool(b) => b.to_string(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => fixed(n.as_f64().unwrap_or(f64::NAN), precision),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

/// Flattens nested objects and arrays into `(dotted.key, value)` pairs;
/// arrays of scalars stay on one line.
fn flatten(prefix: &str, v: &Value, precision: usize, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&join(k), child, precision, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let parts: Vec<String> = items.iter().map(|i| scalar(i, precision)).collect();
            out.push((prefix.to_string(), parts.join(" ")));
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), child, precision, out);
            }
        }
        _ => out.push((prefix.to_string(), scalar(v, precision))),
    }
}

pub fn render<T: Serialize>(report: &T, format: Format, precision: usize) -> String {
    let value = serde_json::to_value(report).expect("reports serialize to JSON");
    match format {
        Format::Json => serde_json::to_string_pretty(&value).expect("JSON values serialize") + "\n",
        Format::Human | Format::Csv => {
            let mut pairs = Vec::new();
            flatten("", &value, precision, &mut pairs);
            let mut s = String::new();
            if format == Format::Csv {
                s.push_str("key,value\n");
            }
            let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in pairs {
                if format == Format::Csv {
                    s.push_str(&format!("{k},{}\n", csv_field(&v)));
                } else {
                    s.push_str(&format!("{k:<width$}  {v}\n"));
                }
            }
            s
        }
    }
}

fn csv_field(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}
