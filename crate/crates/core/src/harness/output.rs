use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::SCHEMA_VERSION;
use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any f64.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// A numeric table with named columns, written as CSV or JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub schema_version: String,
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<const N: usize>(columns: [&str; N], rows: Vec<Vec<f64>>) -> Table {
        Table {
            schema_version: SCHEMA_VERSION.into(),
            meta: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Table {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}
