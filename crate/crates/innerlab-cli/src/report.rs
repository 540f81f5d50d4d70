//! Report documents and their JSON/CSV forms. Every command emits one
//! document; the JSON form is self-describing through its provenance
//! block, the CSV form is a bare table for external plotting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DETERMINISM_STATEMENT: &str = "seedless deterministic computation; \
     identical invocations produce byte-identical reports";

/// Machine-readable run header: tool identity and the truncation depths
/// the numbers depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub determinism: String,
    pub depths: BTreeMap<String, u32>,
}

impl Provenance {
    pub fn new(depths: &[(&str, u32)]) -> Self {
        Provenance {
            tool: "innerlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            determinism: DETERMINISM_STATEMENT.into(),
            depths: depths
                .iter()
                .map(|&(k, v)| (k.to_owned(), v))
                .collect(),
        }
    }
}

/// One tabular report: scalar rows under named columns, with parameters
/// and non-tabular results in `meta`. Rows are kept sorted by their
/// primary key so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub provenance: Provenance,
    pub kind: String,
    pub meta: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Document {
    pub fn new(kind: &str, provenance: Provenance, columns: &[&str]) -> Self {
        Document {
            provenance,
            kind: kind.into(),
            meta: BTreeMap::new(),
            columns: columns.iter().map(|&c| c.to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value)
            .expect("report metadata serializes infallibly");
        self.meta.insert(key.to_owned(), value);
        self
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self)
            .expect("report serialization is infallible");
        text.push('\n');
        text
    }

    /// Header row plus data rows, '.' decimals, '\n' line endings. Row
    /// cells are scalars by construction; nulls become empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn num(x: f64) -> Value {
    serde_json::to_value(x).expect("finite numbers serialize infallibly")
}

pub fn int(x: u64) -> Value {
    Value::from(x)
}
