//! Reports: one JSON document per run, with TSV and plain-text renderings.
//!
//! JSON objects serialise with sorted keys, and wall time is only included
//! on request, so a report is byte-identical across runs of the same config.

use std::time::Duration;

use serde_json::{json, Value};

use crate::config::Format;

/// A table rendered as TSV rows; the JSON form keeps the structured payload.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub table: Option<Table>,
    pub wall_time: Option<Duration>,
}

impl Report {
    pub fn new(command: &str, config: Value, results: Value) -> Self {
        Report {
            command: command.to_string(),
            config,
            results,
            table: None,
            wall_time: None,
        }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn to_value(&self) -> Value {
        let mut doc = json!({
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "version": env!("CARGO_PKG_VERSION"),
        });
        if let Some(t) = self.wall_time {
            doc["wall_time_ms"] = json!(t.as_secs_f64() * 1e3);
        }
        doc
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut out = serde_json::to_string_pretty(&self.to_value()).expect("reports serialise");
                out.push('\n');
                out
            }
            Format::Tsv => self.render_tsv(),
            Format::Human => self.render_human(),
        }
    }

    fn render_tsv(&self) -> String {
        let mut out = String::new();
        match &self.table {
            Some(table) => {
                out.push_str(&table.columns.join("\t"));
                out.push('\n');
                for row in &table.rows {
                    out.push_str(&row.join("\t"));
                    out.push('\n');
                }
            }
            None => {
                out.push_str("key\tvalue\n");
                for (key, value) in flatten(&self.results) {
                    out.push_str(&format!("{key}\t{value}\n"));
                }
            }
        }
        out
    }

    fn render_human(&self) -> String {
        let mut out = format!("treediff {} ({})\n", self.command, env!("CARGO_PKG_VERSION"));
        let rows = flatten(&self.results);
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (key, value) in rows {
            out.push_str(&format!("  {key:<width$}  {value}\n"));
        }
        if let Some(t) = self.wall_time {
            out.push_str(&format!("  wall time {:.3} ms\n", t.as_secs_f64() * 1e3));
        }
        out
    }
}

/// `(path, leaf)` pairs in key order, e.g. `regions[0].radius  2`.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    fn walk(prefix: String, value: &Value, out: &mut Vec<(String, String)>) {
        match value {
            Value::Object(map) if !map.is_empty() => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(key, v, out);
                }
            }
            Value::Array(items) if !items.is_empty() && !items.iter().all(is_scalar) => {
                for (i, v) in items.iter().enumerate() {
                    walk(format!("{prefix}[{i}]"), v, out);
                }
            }
            Value::String(s) => out.push((prefix, s.clone())),
            other => out.push((prefix, other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk(String::new(), value, &mut out);
    out
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Object(_) | Value::Array(_))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keys_are_sorted() {
        let r = Report::new("x", json!({"b": 1, "a": 2}), json!({"z": [1, 2], "y": {"k": "v"}}));
        let text = r.render(Format::Json);
        let a = text.find("\"a\"").unwrap();
        let b = text.find("\"b\"").unwrap();
        assert!(a < b);
        assert!(text.find("\"command\"").unwrap() < text.find("\"version\"").unwrap());
    }

    #[test]
    fn flatten_paths() {
        let rows = flatten(&json!({"r": [{"c": 1}, {"c": 2}], "v": [1, 2], "s": "t"}));
        assert_eq!(
            rows,
            vec![
                ("r[0].c".to_string(), "1".to_string()),
                ("r[1].c".to_string(), "2".to_string()),
                ("s".to_string(), "t".to_string()),
                ("v".to_string(), "[1,2]".to_string()),
            ]
        );
    }

    #[test]
    fn tsv_uses_table_when_present() {
        let r = Report::new("norm", json!({}), json!({})).with_table(Table {
            columns: vec!["depth", "value"],
            rows: vec![vec!["1".into(), "2".into()]],
        });
        assert_eq!(r.render(Format::Tsv), "depth\tvalue\n1\t2\n");
    }
}
