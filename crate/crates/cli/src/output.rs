use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;
use crate::error::CliResult;

pub const SCHEMA: &str = "rmlab/1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const OUTPUT_DIR_ENV: &str = "RMLAB_OUTPUT_DIR";

/// A theorem-backed check that did not hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

impl Failure {
    pub fn new(check: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            detail: detail.into(),
        }
    }
}

/// Command result before rendering.
#[derive(Debug, Clone)]
pub enum Body {
    /// CSV rows, already serialised with their header line.
    Table(String),
    Json(Value),
}

#[derive(Debug, Clone)]
pub struct Report {
    pub body: Body,
    /// Extra `key: value` lines for the CSV header.
    pub notes: Vec<(String, String)>,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn table(csv: String) -> Self {
        Self {
            body: Body::Table(csv),
            notes: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn json(value: Value) -> Self {
        Self {
            body: Body::Json(value),
            notes: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.push((key.to_string(), value.to_string()));
        self
    }

    pub fn fail_if(mut self, bad: bool, check: &str, detail: impl FnOnce() -> String) -> Self {
        if bad {
            self.failures.push(Failure::new(check, detail()));
        }
        self
    }
}

/// Serialises rows to CSV text with a header line.
pub fn csv_rows<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Header metadata embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    /// Milliseconds, only when requested.
    pub wall_clock_ms: Option<u128>,
}

fn float_to_json(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

/// Replaces non-finite numbers, which JSON cannot carry, by strings.
pub fn sanitize(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => float_to_json(f),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(sanitize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, sanitize(v))).collect()),
        other => other,
    }
}

pub fn render(header: &Header, report: &Report, format: Format) -> CliResult<String> {
    match (&report.body, format) {
        (Body::Table(csv), Format::Csv) => {
            let mut out = String::new();
            out.push_str(&format!("# rmlab {}\n", header.version));
            out.push_str(&format!("# command: {}\n", header.command));
            out.push_str(&format!(
                "# config: {}\n",
                serde_json::to_string(&header.config)?
            ));
            match header.seed {
                Some(s) => out.push_str(&format!("# seed: {s}\n")),
                None => out.push_str("# seed: none\n"),
            }
            if let Some(ms) = header.wall_clock_ms {
                out.push_str(&format!("# wall_clock_ms: {ms}\n"));
            }
            for (k, v) in &report.notes {
                out.push_str(&format!("# {k}: {v}\n"));
            }
            for f in &report.failures {
                out.push_str(&format!("# FAILED {}: {}\n", f.check, f.detail));
            }
            out.push_str(csv);
            Ok(out)
        }
        (body, _) => {
            let result = match body {
                Body::Json(v) => v.clone(),
                Body::Table(csv) => table_to_json(csv)?,
            };
            let notes: serde_json::Map<String, Value> = report
                .notes
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect();
            let doc = json!({
                "schema": SCHEMA,
                "header": header,
                "notes": notes,
                "failures": report.failures,
                "result": sanitize(result),
            });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
    }
}

fn cell_value(v: &str) -> Value {
    if v.is_empty() {
        return Value::Null;
    }
    if let Ok(b) = v.parse::<bool>() {
        return Value::Bool(b);
    }
    if let Ok(i) = v.parse::<i64>() {
        return json!(i);
    }
    match v.parse::<f64>() {
        Ok(f) if f.is_finite() => json!(f),
        _ => Value::String(v.to_string()),
    }
}

fn table_to_json(csv_text: &str) -> CliResult<Value> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = r.headers()?.clone();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let obj: serde_json::Map<String, Value> = headers
            .iter()
            .zip(rec.iter())
            .map(|(h, v)| (h.to_string(), cell_value(v)))
            .collect();
        rows.push(Value::Object(obj));
    }
    Ok(Value::Array(rows))
}

/// Where the artifact goes; `None` means stdout.
pub fn destination(out: Option<&PathBuf>, command: &str, format: Format) -> Option<PathBuf> {
    if let Some(p) = out {
        return Some(p.clone());
    }
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(format!("{command}.{}", format.extension())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_cells_keep_their_types() {
        let v = table_to_json("m,x,ok,label,gap\n4,0.25,true,sum,\n").unwrap();
        assert_eq!(
            v,
            json!([{"m": 4, "x": 0.25, "ok": true, "label": "sum", "gap": null}])
        );
    }

    #[test]
    fn non_finite_numbers_become_strings() {
        assert_eq!(float_to_json(f64::INFINITY), json!("inf"));
        assert_eq!(sanitize(json!([1, 0.5])), json!([1, 0.5]));
    }
}
