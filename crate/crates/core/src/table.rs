//! Typed mixed continuous/categorical tables.
//!
//! Storage is column-major. Categorical cells hold an index into the column's
//! category dictionary; `None` is a missing cell.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A column is continuous when every present cell is numeric and it has more
/// than this many distinct values.
pub const INFER_DISTINCT_THRESHOLD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Ordered category dictionary; empty for continuous columns.
    #[serde(default)]
    pub categories: Vec<String>,
}

impl ColumnSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Continuous,
            categories: Vec::new(),
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
            categories: categories.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.kind == ColumnKind::Continuous
    }

    pub fn is_categorical(&self) -> bool {
        self.kind == ColumnKind::Categorical
    }

    pub fn category_index(&self, value: &str) -> Option<u32> {
        self.categories.iter().position(|c| c == value).map(|i| i as u32)
    }
}

/// Checks the invariants of a declared schema: unique names, and at least one
/// unique category per categorical column.
pub fn validate_schema(schema: &[ColumnSpec]) -> Result<()> {
    let mut names = BTreeSet::new();
    for spec in schema {
        if !names.insert(spec.name.as_str()) {
            return Err(Error::Argument(format!("duplicate column name `{}`", spec.name)));
        }
        match spec.kind {
            ColumnKind::Categorical => {
                if spec.categories.is_empty() {
                    return Err(Error::Argument(format!(
                        "categorical column `{}` declares no categories",
                        spec.name
                    )));
                }
                let distinct: BTreeSet<&str> = spec.categories.iter().map(String::as_str).collect();
                if distinct.len() != spec.categories.len() {
                    return Err(Error::Argument(format!(
                        "categorical column `{}` repeats a category",
                        spec.name
                    )));
                }
            }
            ColumnKind::Continuous => {
                if !spec.categories.is_empty() {
                    return Err(Error::Argument(format!(
                        "continuous column `{}` must not declare categories",
                        spec.name
                    )));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Continuous(Vec<Option<f64>>),
    Categorical(Vec<Option<u32>>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Continuous(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Continuous(_) => ColumnKind::Continuous,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            ColumnData::Continuous(v) => v[row].is_none(),
            ColumnData::Categorical(v) => v[row].is_none(),
        }
    }

    pub fn as_continuous(&self) -> Option<&[Option<f64>]> {
        match self {
            ColumnData::Continuous(v) => Some(v),
            ColumnData::Categorical(_) => None,
        }
    }

    pub fn as_categorical(&self) -> Option<&[Option<u32>]> {
        match self {
            ColumnData::Categorical(v) => Some(v),
            ColumnData::Continuous(_) => None,
        }
    }

    fn select(&self, rows: &[usize]) -> Self {
        match self {
            ColumnData::Continuous(v) => ColumnData::Continuous(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Categorical(v) => ColumnData::Categorical(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

/// Cell strings treated as missing on ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingTokens(BTreeSet<String>);

impl MissingTokens {
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        Self(tokens.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, cell: &str) -> bool {
        self.0.contains(cell)
    }
}

impl Default for MissingTokens {
    fn default() -> Self {
        Self::new(["", "NA", "?"])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    schema: Vec<ColumnSpec>,
    columns: Vec<ColumnData>,
    n_rows: usize,
}

impl DataTable {
    pub fn new(schema: Vec<ColumnSpec>, columns: Vec<ColumnData>) -> Result<Self> {
        if schema.len() != columns.len() {
            return Err(Error::Argument(format!(
                "schema has {} columns but {} column vectors were given",
                schema.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map_or(0, ColumnData::len);
        let mut names = BTreeSet::new();
        for (spec, data) in schema.iter().zip(&columns) {
            if !names.insert(spec.name.as_str()) {
                return Err(Error::Argument(format!("duplicate column name `{}`", spec.name)));
            }
            check_column(spec, data, n_rows)?;
        }
        Ok(Self { schema, columns, n_rows })
    }

    /// A zero-row table with the given schema.
    pub fn empty(schema: Vec<ColumnSpec>) -> Self {
        let columns = schema
            .iter()
            .map(|s| match s.kind {
                ColumnKind::Continuous => ColumnData::Continuous(Vec::new()),
                ColumnKind::Categorical => ColumnData::Categorical(Vec::new()),
            })
            .collect();
        Self {
            schema,
            columns,
            n_rows: 0,
        }
    }

    /// Builds a table from string records.
    ///
    /// With a schema, header names must match it in order; categorical
    /// columns with a non-empty dictionary reject unknown values, while an
    /// empty dictionary registers values in first-appearance order. Without a
    /// schema, kinds are inferred (see [`INFER_DISTINCT_THRESHOLD`]).
    pub fn from_records<I>(
        header: &[String],
        records: I,
        schema: Option<&[ColumnSpec]>,
        missing: &MissingTokens,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let width = header.len();
        let mut raw: Vec<Vec<String>> = Vec::new();
        for (i, rec) in records.into_iter().enumerate() {
            if rec.len() != width {
                return Err(Error::Parse {
                    row: i + 1,
                    column: None,
                    message: format!("expected {width} fields, found {}", rec.len()),
                });
            }
            raw.push(rec);
        }

        let specs: Vec<ColumnSpec> = match schema {
            Some(schema) => {
                if schema.len() != width || schema.iter().zip(header).any(|(s, h)| &s.name != h) {
                    return Err(Error::Argument(format!(
                        "header [{}] does not match schema [{}]",
                        header.join(", "),
                        schema.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(", ")
                    )));
                }
                schema.to_vec()
            }
            None => (0..width)
                .map(|c| {
                    let kind = infer_kind(raw.iter().map(|r| r[c].as_str()), missing);
                    ColumnSpec {
                        name: header[c].clone(),
                        kind,
                        categories: Vec::new(),
                    }
                })
                .collect(),
        };

        let mut out_schema = Vec::with_capacity(width);
        let mut columns = Vec::with_capacity(width);
        for (c, spec) in specs.into_iter().enumerate() {
            match spec.kind {
                ColumnKind::Continuous => {
                    let mut cells = Vec::with_capacity(raw.len());
                    for (r, rec) in raw.iter().enumerate() {
                        let s = rec[c].as_str();
                        if missing.contains(s) {
                            cells.push(None);
                            continue;
                        }
                        match parse_number(s) {
                            Some(v) => cells.push(Some(v)),
                            None => {
                                return Err(Error::Parse {
                                    row: r + 1,
                                    column: Some(spec.name.clone()),
                                    message: format!("`{s}` is not a finite number"),
                                })
                            }
                        }
                    }
                    columns.push(ColumnData::Continuous(cells));
                    out_schema.push(spec);
                }
                ColumnKind::Categorical => {
                    let strict = !spec.categories.is_empty();
                    let mut categories = spec.categories.clone();
                    let mut index: BTreeMap<String, u32> = categories
                        .iter()
                        .enumerate()
                        .map(|(i, s)| (s.clone(), i as u32))
                        .collect();
                    let mut cells = Vec::with_capacity(raw.len());
                    for (r, rec) in raw.iter().enumerate() {
                        let s = rec[c].as_str();
                        if missing.contains(s) {
                            cells.push(None);
                            continue;
                        }
                        let idx = match index.get(s) {
                            Some(&i) => i,
                            None if strict => {
                                return Err(Error::Parse {
                                    row: r + 1,
                                    column: Some(spec.name.clone()),
                                    message: format!("`{s}` is not a declared category"),
                                })
                            }
                            None => {
                                let i = categories.len() as u32;
                                categories.push(s.to_string());
                                index.insert(s.to_string(), i);
                                i
                            }
                        };
                        cells.push(Some(idx));
                    }
                    columns.push(ColumnData::Categorical(cells));
                    out_schema.push(ColumnSpec { categories, ..spec });
                }
            }
        }
        Self::new(out_schema, columns)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    pub fn schema(&self) -> &[ColumnSpec] {
        &self.schema
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &ColumnData {
        &self.columns[i]
    }

    pub fn spec(&self, i: usize) -> &ColumnSpec {
        &self.schema[i]
    }

    pub fn into_parts(self) -> (Vec<ColumnSpec>, Vec<ColumnData>) {
        (self.schema, self.columns)
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Case-insensitive lookup.
    pub fn find_column(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s.name.eq_ignore_ascii_case(name))
    }

    /// First missing cell as `(row, column)`, scanning column by column.
    pub fn first_missing(&self) -> Option<(usize, usize)> {
        self.columns
            .iter()
            .enumerate()
            .find_map(|(c, data)| (0..self.n_rows).find(|&r| data.is_missing(r)).map(|r| (r, c)))
    }

    pub fn has_missing(&self) -> bool {
        self.first_missing().is_some()
    }

    /// Text of a cell as it is written to CSV; `None` when missing.
    pub fn cell_text(&self, row: usize, col: usize) -> Option<String> {
        match &self.columns[col] {
            ColumnData::Continuous(v) => v[row].map(|x| format!("{x}")),
            ColumnData::Categorical(v) => v[row].map(|i| self.schema[col].categories[i as usize].clone()),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// Keeps the named columns, in the given order.
    pub fn project(&self, names: &[&str]) -> Result<Self> {
        let mut schema = Vec::with_capacity(names.len());
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            let i = self.column_index(name)?;
            schema.push(self.schema[i].clone());
            columns.push(self.columns[i].clone());
        }
        Self::new(schema, columns)
    }

    pub fn rename_column(&mut self, i: usize, name: impl Into<String>) -> Result<()> {
        let name = name.into();
        if self.schema.iter().enumerate().any(|(j, s)| j != i && s.name == name) {
            return Err(Error::Argument(format!("duplicate column name `{name}`")));
        }
        self.schema[i].name = name;
        Ok(())
    }

    pub fn replace_column(&mut self, i: usize, spec: ColumnSpec, data: ColumnData) -> Result<()> {
        check_column(&spec, &data, self.n_rows)?;
        if self.schema.iter().enumerate().any(|(j, s)| j != i && s.name == spec.name) {
            return Err(Error::Argument(format!("duplicate column name `{}`", spec.name)));
        }
        self.schema[i] = spec;
        self.columns[i] = data;
        Ok(())
    }

    pub fn push_column(&mut self, spec: ColumnSpec, data: ColumnData) -> Result<()> {
        if self.schema.is_empty() {
            self.n_rows = data.len();
        }
        check_column(&spec, &data, self.n_rows)?;
        if self.schema.iter().any(|s| s.name == spec.name) {
            return Err(Error::Argument(format!("duplicate column name `{}`", spec.name)));
        }
        self.schema.push(spec);
        self.columns.push(data);
        Ok(())
    }

    /// Appends the rows of `other`, which must have an identical schema.
    pub fn append(&mut self, other: &DataTable) -> Result<()> {
        if self.schema != other.schema {
            return Err(Error::Argument("cannot append tables with different schemas".to_string()));
        }
        for (dst, src) in self.columns.iter_mut().zip(&other.columns) {
            match (dst, src) {
                (ColumnData::Continuous(d), ColumnData::Continuous(s)) => d.extend_from_slice(s),
                (ColumnData::Categorical(d), ColumnData::Categorical(s)) => d.extend_from_slice(s),
                _ => unreachable!("schemas are equal"),
            }
        }
        self.n_rows += other.n_rows;
        Ok(())
    }

    /// Turns a categorical column whose categories are all numeric into a
    /// continuous one. Continuous columns are left alone.
    pub fn coerce_continuous(&mut self, name: &str) -> Result<()> {
        let i = self.column_index(name)?;
        let ColumnData::Categorical(cells) = &self.columns[i] else {
            return Ok(());
        };
        let spec = &self.schema[i];
        let mut values = Vec::with_capacity(spec.categories.len());
        for cat in &spec.categories {
            values.push(parse_number(cat).ok_or_else(|| Error::ColumnType {
                column: spec.name.clone(),
                expected: "numeric",
            })?);
        }
        let data = ColumnData::Continuous(cells.iter().map(|c| c.map(|k| values[k as usize])).collect());
        let spec = ColumnSpec::continuous(spec.name.clone());
        self.replace_column(i, spec, data)
    }

    /// Turns a continuous column into a categorical one whose categories are
    /// the CSV text of each value, in first-appearance order.
    pub fn coerce_categorical(&mut self, name: &str) -> Result<()> {
        let i = self.column_index(name)?;
        let ColumnData::Continuous(cells) = &self.columns[i] else {
            return Ok(());
        };
        let mut categories: Vec<String> = Vec::new();
        let mut index: BTreeMap<String, u32> = BTreeMap::new();
        let data = cells
            .iter()
            .map(|c| {
                c.map(|v| {
                    let text = format!("{v}");
                    *index.entry(text.clone()).or_insert_with(|| {
                        categories.push(text);
                        categories.len() as u32 - 1
                    })
                })
            })
            .collect();
        let spec = ColumnSpec::categorical(self.schema[i].name.clone(), categories);
        self.replace_column(i, spec, ColumnData::Categorical(data))
    }
}

fn check_column(spec: &ColumnSpec, data: &ColumnData, n_rows: usize) -> Result<()> {
    if spec.kind != data.kind() {
        return Err(Error::ColumnType {
            column: spec.name.clone(),
            expected: kind_name(spec.kind),
        });
    }
    if data.len() != n_rows {
        return Err(Error::Argument(format!(
            "column `{}` has {} rows, expected {n_rows}",
            spec.name,
            data.len()
        )));
    }
    if let ColumnData::Categorical(cells) = data {
        let k = spec.categories.len() as u32;
        if let Some(bad) = cells.iter().flatten().find(|&&c| c >= k) {
            return Err(Error::Argument(format!(
                "column `{}` has category index {bad} but only {k} categories",
                spec.name
            )));
        }
    }
    Ok(())
}

pub(crate) fn kind_name(kind: ColumnKind) -> &'static str {
    match kind {
        ColumnKind::Continuous => "continuous",
        ColumnKind::Categorical => "categorical",
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn infer_kind<'a>(cells: impl Iterator<Item = &'a str>, missing: &MissingTokens) -> ColumnKind {
    let mut distinct = BTreeSet::new();
    for s in cells {
        if missing.contains(s) {
            continue;
        }
        match parse_number(s) {
            // +0.0 and -0.0 are the same value
            Some(v) => {
                distinct.insert((v + 0.0).to_bits());
            }
            None => return ColumnKind::Categorical,
        }
    }
    if distinct.len() > INFER_DISTINCT_THRESHOLD {
        ColumnKind::Continuous
    } else {
        ColumnKind::Categorical
    }
}

/// Median of a non-empty slice; even-sized inputs average the two central values.
pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Convenience for tests and fixtures: build string records from `&str` rows.
pub fn records<const N: usize>(rows: &[[&str; N]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

/// Convenience: header vector from names.
pub fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
