//! Records and their rendering. Keys are sorted, so identical runs print
//! identical bytes.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(Map<String, Value>);

impl Record {
    pub fn new(command: &str, method: &str) -> Self {
        Record::default()
            .with("command", command)
            .with("method", method)
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("record fields serialize");
        self.0.insert(key.to_string(), v);
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("records serialize")
    }

    /// One `key  value` line per field, keys padded to a common width.
    pub fn to_table(&self) -> String {
        let width = self.0.keys().map(|k| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.0 {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k:<width$}  {shown}\n"));
        }
        out
    }
}

pub fn render(records: &[Record], format: Format) -> String {
    match format {
        Format::Json => records.iter().map(|r| r.to_json() + "\n").collect(),
        Format::Table => records
            .iter()
            .map(Record::to_table)
            .collect::<Vec<_>>()
            .join("\n"),
    }
}
