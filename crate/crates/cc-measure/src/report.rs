//! CSV tables and JSON summaries with reproducible formatting.
//!
//! Numbers use 17 significant digits with '.' as the decimal separator and
//! LF line endings, so identical runs produce byte-identical files.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::error::Result;

/// 17 significant digits; round-trips every f64 exactly.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{v:.16e}")
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "csv row width mismatch");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: Option<&str>) -> Result<()> {
        let text = self.render();
        match path {
            Some(p) => {
                let mut f = std::fs::File::create(p)?;
                f.write_all(text.as_bytes())?;
            }
            None => {
                print!("{text}");
            }
        }
        Ok(())
    }
}

/// Versioned JSON summary carrying every tolerance and gap used by a run.
pub struct JsonSummary {
    root: Map<String, Value>,
}

impl JsonSummary {
    pub fn new(command: &str, seed: u64) -> Self {
        let mut root = Map::new();
        root.insert("schema".into(), json!(1));
        root.insert("command".into(), json!(command));
        root.insert("seed".into(), json!(seed));
        JsonSummary { root }
    }

    pub fn set(&mut self, key: &str, value: Value) -> &mut Self {
        self.root.insert(key.to_string(), value);
        self
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Value::Object(self.root.clone()))
            .expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn write_to(&self, path: Option<&str>) -> Result<()> {
        let text = self.render();
        match path {
            Some(p) => {
                let mut f = std::fs::File::create(p)?;
                f.write_all(text.as_bytes())?;
            }
            None => {
                print!("{text}");
            }
        }
        Ok(())
    }
}
