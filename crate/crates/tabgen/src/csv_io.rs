//! Comma-separated tables with a header row. Missing cells are written as
//! empty fields.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use tabgen_core::table::{ColumnSpec, DataTable, MissingTokens};

use crate::error::{require_input, Error, Result};

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a table from any reader. `origin` only labels errors.
pub fn read_table<R: Read>(
    reader: R,
    origin: &Path,
    schema: Option<&[ColumnSpec]>,
    missing: &MissingTokens,
) -> Result<DataTable> {
    // flexible, so ragged rows reach the row-numbered check in the core
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(origin, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(origin, e))?;
        records.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    Ok(DataTable::from_records(&header, records, schema, missing)?)
}

pub fn load_csv(path: &Path, schema: Option<&[ColumnSpec]>, missing: &MissingTokens) -> Result<DataTable> {
    require_input(path)?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_table(file, path, schema, missing)
}

pub fn write_table<W: Write>(writer: W, origin: &Path, table: &DataTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(table.schema().iter().map(|s| s.name.as_str()))
        .map_err(|e| csv_err(origin, e))?;
    let mut row = Vec::with_capacity(table.n_cols());
    for r in 0..table.n_rows() {
        row.clear();
        row.extend((0..table.n_cols()).map(|c| table.cell_text(r, c).unwrap_or_default()));
        w.write_record(&row).map_err(|e| csv_err(origin, e))?;
    }
    w.flush().map_err(|e| Error::io(origin, e))
}

pub fn write_csv(path: &Path, table: &DataTable) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_table(std::io::BufWriter::new(file), path, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tabgen_core::table::ColumnData;

    fn read(text: &str) -> Result<DataTable> {
        read_table(text.as_bytes(), Path::new("mem.csv"), None, &MissingTokens::default())
    }

    #[test]
    fn question_mark_is_missing() {
        let t = read("a,b\nx,1\n?,2\ny,3\n").unwrap();
        assert_eq!(t.column(0), &ColumnData::Categorical(vec![Some(0), None, Some(1)]));
    }

    #[test]
    fn ragged_row_names_its_row() {
        let text = "a,b\n1,2\n1,2\n1,2\n1,2\n1,2\n1,2\n1\n";
        let err = read(text).unwrap_err().to_string();
        assert!(err.contains("row 7"), "{err}");
    }

    #[test]
    fn quoted_fields() {
        let t = read("name,city\n\"Smith, J\",\"Rio\"\n").unwrap();
        assert_eq!(t.cell_text(0, 0).unwrap(), "Smith, J");
    }

    #[test]
    fn write_then_read_is_a_fixpoint() {
        let text = "x,c\n1.5,a\n,b\n-2.25,\n";
        let schema = [ColumnSpec::continuous("x"), ColumnSpec::categorical("c", ["a", "b"])];
        let t = read_table(text.as_bytes(), Path::new("m"), Some(&schema), &MissingTokens::default()).unwrap();
        let mut buf = Vec::new();
        write_table(&mut buf, Path::new("m"), &t).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), text);
        let back = read_table(buf.as_slice(), Path::new("m"), Some(&schema), &MissingTokens::default()).unwrap();
        assert_eq!(back, t);
    }
}
