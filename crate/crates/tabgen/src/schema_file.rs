//! JSON schema sidecar: an array of `{name, kind, categories}` objects.

use std::fs;
use std::path::Path;

use tabgen_core::table::{validate_schema, ColumnSpec};

use crate::error::{require_input, Error, Result};

pub fn load_schema(path: &Path) -> Result<Vec<ColumnSpec>> {
    require_input(path)?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let schema: Vec<ColumnSpec> = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    validate_schema(&schema)?;
    Ok(schema)
}

pub fn save_schema(path: &Path, schema: &[ColumnSpec]) -> Result<()> {
    let mut text = serde_json::to_string_pretty(schema).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        let schema = vec![ColumnSpec::continuous("age"), ColumnSpec::categorical("sex", ["F", "M"])];
        save_schema(&p, &schema).unwrap();
        assert_eq!(load_schema(&p).unwrap(), schema);
    }

    #[test]
    fn missing_file() {
        let err = load_schema(Path::new("/nonexistent/schema.json")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("/nonexistent/schema.json"));
    }
}
