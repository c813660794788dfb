//! Deterministic CSV and JSON rendering shared by every subcommand.
//!
//! A report is metadata plus a rectangular table. CSV renders metadata as
//! leading `#`-prefixed `key,value` lines; JSON mirrors the same content
//! under the stable keys `meta`, `columns`, `rows`. Cells are strings:
//! floats are formatted once, to 17 significant digits, so the two formats
//! carry byte-identical values and repeated runs of the same config produce
//! identical bytes.

use serde_json::{Map, Value};

pub struct Table {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// Round-trip-safe float formatting: 17 significant digits, `.` decimal.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

impl Table {
    pub fn new(command: &str, potential_label: &str) -> Self {
        Self {
            meta: vec![
                ("coulomb-edge".into(), env!("CARGO_PKG_VERSION").into()),
                ("command".into(), command.into()),
                ("potential".into(), potential_label.into()),
            ],
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn set_columns(&mut self, columns: &[&str]) {
        self.columns = columns.iter().map(|c| (*c).to_string()).collect();
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    /// Adopts a library-rendered CSV block (header line, then data rows) as
    /// this table's columns and rows.
    pub fn adopt_csv(&mut self, csv: &str) {
        let mut lines = csv.lines();
        if let Some(header) = lines.next() {
            self.columns = header.split(',').map(str::to_string).collect();
        }
        for line in lines {
            if line.is_empty() {
                continue;
            }
            self.rows
                .push(line.split(',').map(str::to_string).collect());
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.meta {
            out.push_str(&format!("# {key},{value}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut meta = Map::new();
        for (key, value) in &self.meta {
            meta.insert(key.clone(), Value::String(value.clone()));
        }
        let columns: Vec<Value> = self
            .columns
            .iter()
            .map(|c| Value::String(c.clone()))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Array(row.iter().map(|c| Value::String(c.clone())).collect()))
            .collect();
        let mut root = Map::new();
        root.insert("meta".into(), Value::Object(meta));
        root.insert("columns".into(), Value::Array(columns));
        root.insert("rows".into(), Value::Array(rows));
        let mut rendered =
            serde_json::to_string_pretty(&Value::Object(root)).expect("string-only JSON tree");
        rendered.push('\n');
        rendered
    }
}
