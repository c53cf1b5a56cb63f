//! JSON reports (pretty-printed, keys sorted) and the pair-matrix CSV.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use tabgen_core::metrics::FidelityReport;

use crate::error::{Error, Result};

/// Pretty JSON with object keys in sorted order and a trailing newline.
pub fn to_sorted_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // serde_json's map is ordered by key unless `preserve_order` is enabled
    let v: Value = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = to_sorted_json(value).map_err(|e| Error::json(path, e))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Symmetric pair matrix as CSV with column names on both axes; the
/// diagonal is left empty.
pub fn pairs_csv(report: &FidelityReport) -> String {
    let names: Vec<&str> = report.columns.iter().map(|c| c.name.as_str()).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = vec![""];
    head.extend(&names);
    w.write_record(&head).expect("in-memory write");
    for (i, row) in report.pairs.iter().enumerate() {
        let mut rec = vec![names[i].to_string()];
        rec.extend(row.iter().map(|v| v.map(|x| format!("{x}")).unwrap_or_default()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
