//! The JSON envelope every subcommand emits, plus the flat CSV export.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const TOOL_VERSION: &str = concat!("rkr ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub versions: String,
    pub timestamp: String,
}

impl Report {
    pub fn new(command: &str, inputs: Value, results: Value) -> Self {
        Report {
            command: command.to_string(),
            inputs,
            results,
            versions: TOOL_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `results.rows` (when present) as a table, otherwise one
    /// `key,value` line per scalar leaf of `results`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(rows) = self.results.get("rows").and_then(Value::as_array) {
            let mut columns: Vec<String> = Vec::new();
            for row in rows {
                if let Some(obj) = row.as_object() {
                    for key in obj.keys() {
                        if !columns.contains(key) {
                            columns.push(key.clone());
                        }
                    }
                }
            }
            out.push_str(&columns.join(","));
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = columns
                    .iter()
                    .map(|c| row.get(c).map_or(String::new(), scalar_text))
                    .collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            return out;
        }
        out.push_str("key,value\n");
        let mut leaves = Vec::new();
        flatten("", &self.results, &mut leaves);
        for (key, value) in leaves {
            out.push_str(&format!("{key},{value}\n"));
        }
        out
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains(',') || s.contains('"') => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
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
                flatten(&join(k), child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), child, out);
            }
        }
        scalar => out.push((prefix.to_string(), scalar_text(scalar))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trips_through_json() {
        let r = Report::new("exact", json!({"k": 1}), json!({"value": 0.75}));
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.timestamp.ends_with('Z'));
    }

    #[test]
    fn csv_flattening() {
        let r = Report::new(
            "x",
            json!({}),
            json!({"value": 0.5, "ci95": [0.4, 0.6], "tag": null}),
        );
        assert_eq!(
            r.to_csv(),
            "key,value\nci95.0,0.4\nci95.1,0.6\ntag,\nvalue,0.5\n"
        );
        let r = Report::new(
            "x",
            json!({}),
            json!({"rows": [{"a": 1, "b": "p,q"}, {"a": 2}]}),
        );
        assert_eq!(r.to_csv(), "a,b\n1,\"p,q\"\n2,\n");
    }
}
