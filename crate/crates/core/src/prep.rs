//! Dataset preparation: group-median imputation, categorical fill,
//! per-games deduplication with participation counts, and the Olympic and
//! census recipes built from them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::table::{median, ColumnData, ColumnKind, ColumnSpec, DataTable};

/// Category written into the medal column for athletes without a medal.
pub const NO_MEDAL: &str = "Thanks";
/// Category used for missing census categoricals.
pub const UNKNOWN: &str = "Unknown";

pub const AOS: &str = "AOS";
pub const AOE: &str = "AOE";

/// Column order of a prepared Olympic table.
pub const OLYMPIC_COLUMNS: [&str; 11] = [
    "age", "height", "weight", "sex", "year", "season", "city", "sport", "medal", AOS, AOE,
];

fn continuous_index(table: &DataTable, name: &str) -> Result<usize> {
    let i = table.column_index(name)?;
    if table.spec(i).kind != ColumnKind::Continuous {
        return Err(Error::ColumnType {
            column: name.to_string(),
            expected: "continuous",
        });
    }
    Ok(i)
}

fn categorical_index(table: &DataTable, name: &str) -> Result<usize> {
    let i = table.column_index(name)?;
    if table.spec(i).kind != ColumnKind::Categorical {
        return Err(Error::ColumnType {
            column: name.to_string(),
            expected: "categorical",
        });
    }
    Ok(i)
}

/// Fills missing cells of a continuous column with the median of its group.
/// Groups with no present value fall back to the global median.
pub fn impute_group_median(table: &DataTable, target: &str, group_by: &[&str]) -> Result<DataTable> {
    let t = continuous_index(table, target)?;
    let groups: Vec<&[Option<u32>]> = group_by
        .iter()
        .map(|g| categorical_index(table, g).map(|i| table.column(i).as_categorical().unwrap_or_default()))
        .collect::<Result<_>>()?;
    let values = table.column(t).as_continuous().unwrap_or_default();
    if values.iter().all(Option::is_some) {
        return Ok(table.clone());
    }

    let mut all: Vec<f64> = values.iter().flatten().copied().collect();
    let global = median(&mut all)
        .ok_or_else(|| Error::Imputation(format!("column `{target}` has no values to take a median of")))?;

    let key = |row: usize| -> Vec<Option<u32>> { groups.iter().map(|g| g[row]).collect() };
    let mut members: BTreeMap<Vec<Option<u32>>, Vec<f64>> = BTreeMap::new();
    for (row, v) in values.iter().enumerate() {
        let entry = members.entry(key(row)).or_default();
        if let Some(v) = v {
            entry.push(*v);
        }
    }
    let medians: BTreeMap<Vec<Option<u32>>, f64> = members
        .into_iter()
        .map(|(k, mut vs)| {
            let m = median(&mut vs).unwrap_or(global);
            (k, m)
        })
        .collect();

    let filled = values
        .iter()
        .enumerate()
        .map(|(row, v)| Some(v.unwrap_or_else(|| medians[&key(row)])))
        .collect();
    let mut out = table.clone();
    out.replace_column(t, table.spec(t).clone(), ColumnData::Continuous(filled))?;
    Ok(out)
}

/// Sets missing cells of a categorical column to `fill_value`, adding it to
/// the dictionary when absent.
pub fn fill_categorical(table: &DataTable, column: &str, fill_value: &str) -> Result<DataTable> {
    let i = categorical_index(table, column)?;
    let mut spec = table.spec(i).clone();
    let idx = match spec.category_index(fill_value) {
        Some(idx) => idx,
        None => {
            spec.categories.push(fill_value.to_string());
            spec.categories.len() as u32 - 1
        }
    };
    let cells = table.column(i).as_categorical().unwrap_or_default();
    let filled = cells.iter().map(|c| Some(c.unwrap_or(idx))).collect();
    let mut out = table.clone();
    out.replace_column(i, spec, ColumnData::Categorical(filled))?;
    Ok(out)
}

/// Hashable view of a cell for grouping. Continuous values compare by bits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum CellKey {
    Missing,
    Number(u64),
    Category(u32),
}

fn cell_key(data: &ColumnData, row: usize) -> CellKey {
    match data {
        ColumnData::Continuous(v) => v[row].map_or(CellKey::Missing, |x| CellKey::Number((x + 0.0).to_bits())),
        ColumnData::Categorical(v) => v[row].map_or(CellKey::Missing, CellKey::Category),
    }
}

/// Collapses rows that share `(identity_cols, year_col)` into their first
/// occurrence and appends two categorical columns: `AOS`, the number of
/// distinct sports, and `AOE`, the number of distinct events, in that group.
///
/// Appearances in different years stay separate rows.
pub fn dedup_with_participation_counts(
    table: &DataTable,
    identity_cols: &[&str],
    year_col: &str,
    sport_col: &str,
    event_col: &str,
) -> Result<DataTable> {
    let key_cols: Vec<usize> = identity_cols
        .iter()
        .chain(core::iter::once(&year_col))
        .map(|c| table.column_index(c))
        .collect::<Result<_>>()?;
    let sport = table.column_index(sport_col)?;
    let event = table.column_index(event_col)?;

    let bad: Vec<usize> = (0..table.n_rows())
        .filter(|&r| key_cols.iter().any(|&c| table.column(c).is_missing(r)))
        .collect();
    if !bad.is_empty() {
        let shown: Vec<String> = bad.iter().take(10).map(|r| format!("{}", r + 1)).collect();
        return Err(Error::Preparation(format!(
            "{} row(s) lack an identity or year value: rows {}{}",
            bad.len(),
            shown.join(", "),
            if bad.len() > 10 { ", ..." } else { "" }
        )));
    }

    struct Group {
        first: usize,
        sports: BTreeSet<CellKey>,
        events: BTreeSet<CellKey>,
    }
    let mut index: BTreeMap<Vec<CellKey>, usize> = BTreeMap::new();
    let mut groups: Vec<Group> = Vec::new();
    for r in 0..table.n_rows() {
        let key: Vec<CellKey> = key_cols.iter().map(|&c| cell_key(table.column(c), r)).collect();
        let g = *index.entry(key).or_insert_with(|| {
            groups.push(Group {
                first: r,
                sports: BTreeSet::new(),
                events: BTreeSet::new(),
            });
            groups.len() - 1
        });
        groups[g].sports.insert(cell_key(table.column(sport), r));
        groups[g].events.insert(cell_key(table.column(event), r));
    }

    let firsts: Vec<usize> = groups.iter().map(|g| g.first).collect();
    let mut out = table.select_rows(&firsts);
    let (aos_spec, aos) = count_column(AOS, groups.iter().map(|g| g.sports.len()));
    let (aoe_spec, aoe) = count_column(AOE, groups.iter().map(|g| g.events.len()));
    out.push_column(aos_spec, aos)?;
    out.push_column(aoe_spec, aoe)?;
    Ok(out)
}

fn count_column(name: &str, counts: impl Iterator<Item = usize>) -> (ColumnSpec, ColumnData) {
    let mut categories: Vec<String> = Vec::new();
    let mut cells = Vec::new();
    for n in counts {
        let text = format!("{n}");
        let idx = match categories.iter().position(|c| *c == text) {
            Some(i) => i,
            None => {
                categories.push(text);
                categories.len() - 1
            }
        };
        cells.push(Some(idx as u32));
    }
    (ColumnSpec::categorical(name, categories), ColumnData::Categorical(cells))
}

/// Drops categories that no cell uses, keeping the order of the rest.
pub fn compact_categories(table: &DataTable) -> Result<DataTable> {
    let mut out = table.clone();
    for i in 0..table.n_cols() {
        let ColumnData::Categorical(cells) = table.column(i) else {
            continue;
        };
        let spec = table.spec(i);
        let mut used = vec![false; spec.categories.len()];
        for c in cells.iter().flatten() {
            used[*c as usize] = true;
        }
        if used.iter().all(|&u| u) {
            continue;
        }
        let mut remap = vec![u32::MAX; used.len()];
        let mut categories = Vec::new();
        for (old, cat) in spec.categories.iter().enumerate() {
            if used[old] {
                remap[old] = categories.len() as u32;
                categories.push(cat.clone());
            }
        }
        let cells = cells.iter().map(|c| c.map(|k| remap[k as usize])).collect();
        out.replace_column(
            i,
            ColumnSpec::categorical(spec.name.clone(), categories),
            ColumnData::Categorical(cells),
        )?;
    }
    Ok(out)
}

/// Options for [`prepare_olympic_with`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OlympicOptions {
    /// Columns identifying an athlete. `None` means the athlete-ID column
    /// when the table has one, otherwise `(name, sex)`.
    pub identity: Option<Vec<String>>,
}

pub fn prepare_olympic(raw: &DataTable) -> Result<DataTable> {
    prepare_olympic_with(raw, &OlympicOptions::default())
}

/// Olympic athlete recipe.
///
/// Missing age, height and weight take the median of the same sport and sex;
/// missing medals become [`NO_MEDAL`]; repeated rows of one athlete in one
/// games year collapse into one row carrying `AOS`/`AOE`. The result has the
/// three continuous and eight categorical columns of [`OLYMPIC_COLUMNS`].
///
/// A table that already carries `AOS` and `AOE` is treated as prepared and
/// is not deduplicated again.
pub fn prepare_olympic_with(raw: &DataTable, opts: &OlympicOptions) -> Result<DataTable> {
    let mut t = raw.clone();
    let prepared = t.find_column(AOS).is_some() && t.find_column(AOE).is_some();

    let mut required: Vec<&str> = OLYMPIC_COLUMNS[..9].to_vec();
    if prepared {
        required.extend([AOS, AOE]);
    } else {
        required.push("event");
    }
    for name in &required {
        let i = t
            .find_column(name)
            .ok_or_else(|| Error::Preparation(format!("required column `{name}` is missing")))?;
        t.rename_column(i, *name)?;
    }

    for name in ["age", "height", "weight"] {
        t.coerce_continuous(name)?;
    }
    for name in required.iter().skip(3) {
        t.coerce_categorical(name)?;
    }

    for name in ["age", "height", "weight"] {
        t = impute_group_median(&t, name, &["sport", "sex"])?;
    }
    t = fill_categorical(&t, "medal", NO_MEDAL)?;

    if !prepared {
        let identity: Vec<String> = match &opts.identity {
            Some(cols) => cols.clone(),
            None => match t.find_column("id") {
                Some(i) => vec![t.spec(i).name.clone()],
                None => {
                    let mut cols = Vec::new();
                    for name in ["name", "sex"] {
                        let i = t.find_column(name).ok_or_else(|| {
                            Error::Preparation(format!(
                                "no athlete id column and identity column `{name}` is missing"
                            ))
                        })?;
                        cols.push(t.spec(i).name.clone());
                    }
                    cols
                }
            },
        };
        let identity: Vec<&str> = identity.iter().map(String::as_str).collect();
        t = dedup_with_participation_counts(&t, &identity, "year", "sport", "event")?;
    }

    let out = compact_categories(&t.project(&OLYMPIC_COLUMNS)?)?;
    if let Some((row, col)) = out.first_missing() {
        return Err(Error::Preparation(format!(
            "column `{}` still has a missing value at row {}",
            out.spec(col).name,
            row + 1
        )));
    }
    Ok(out)
}

/// Census recipe: `?` cells are missing; missing categoricals become
/// [`UNKNOWN`], missing continuous cells take the column's global median.
pub fn prepare_census(raw: &DataTable) -> Result<DataTable> {
    let mut t = raw.clone();
    for i in 0..t.n_cols() {
        let name = t.spec(i).name.clone();
        match t.column(i) {
            ColumnData::Categorical(cells) => {
                let q = t.spec(i).category_index("?");
                let cells: Vec<Option<u32>> = cells.iter().map(|c| c.filter(|k| Some(*k) != q)).collect();
                if cells.iter().all(Option::is_some) {
                    continue;
                }
                let spec = t.spec(i).clone();
                t.replace_column(i, spec, ColumnData::Categorical(cells))?;
                t = fill_categorical(&t, &name, UNKNOWN)?;
            }
            ColumnData::Continuous(_) => {
                t = impute_group_median(&t, &name, &[])?;
            }
        }
    }
    compact_categories(&t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{header, records, MissingTokens};

    fn table(h: &[&str], rows: Vec<Vec<String>>) -> DataTable {
        DataTable::from_records(&header(h), rows, None, &MissingTokens::default()).unwrap()
    }

    #[test]
    fn group_median_of_two() {
        let mut t = table(
            &["sport", "height"],
            records(&[["Row", "190"], ["Row", "200"], ["Row", "NA"], ["Judo", "170"]]),
        );
        t.coerce_continuous("height").unwrap();
        let out = impute_group_median(&t, "height", &["sport"]).unwrap();
        assert_eq!(out.column(1).as_continuous().unwrap()[2], Some(195.0));
        assert_eq!(out.column(1).as_continuous().unwrap()[3], Some(170.0));
    }

    #[test]
    fn empty_group_falls_back_to_global_median() {
        let mut t = table(
            &["sport", "w"],
            records(&[["A", "10"], ["A", "20"], ["A", "30"], ["B", "NA"]]),
        );
        t.coerce_continuous("w").unwrap();
        let out = impute_group_median(&t, "w", &["sport"]).unwrap();
        assert_eq!(out.column(1).as_continuous().unwrap()[3], Some(20.0));
    }

    #[test]
    fn imputation_without_missing_is_noop_and_all_missing_fails() {
        let mut t = table(&["s", "w"], records(&[["A", "1"], ["B", "2"]]));
        t.coerce_continuous("w").unwrap();
        assert_eq!(impute_group_median(&t, "w", &["s"]).unwrap(), t);

        let mut t = table(&["s", "w"], records(&[["A", "NA"], ["B", "NA"]]));
        t.coerce_continuous("w").unwrap();
        assert!(matches!(impute_group_median(&t, "w", &["s"]), Err(Error::Imputation(_))));
        assert!(matches!(impute_group_median(&t, "s", &[]), Err(Error::ColumnType { .. })));
    }

    #[test]
    fn medal_fill() {
        let t = table(&["medal"], records(&[["Gold"], ["NA"], ["Silver"]]));
        let out = fill_categorical(&t, "medal", NO_MEDAL).unwrap();
        let texts: Vec<_> = (0..3).map(|r| out.cell_text(r, 0).unwrap()).collect();
        assert_eq!(texts, ["Gold", "Thanks", "Silver"]);
        assert_eq!(out.spec(0).categories.len(), t.spec(0).categories.len() + 1);

        let again = fill_categorical(&out, "medal", NO_MEDAL).unwrap();
        assert_eq!(again, out);
    }

    #[test]
    fn fill_rejects_continuous() {
        let rows: Vec<Vec<String>> = (0..25).map(|i| vec![format!("{i}")]).collect();
        let t = table(&["x"], rows);
        assert!(matches!(fill_categorical(&t, "x", "z"), Err(Error::ColumnType { .. })));
    }

    #[test]
    fn dedup_counts_sports_and_events() {
        let t = table(
            &["id", "year", "sport", "event"],
            records(&[
                ["1", "1992", "Swimming", "100m"],
                ["1", "1992", "Swimming", "200m"],
                ["1", "1992", "Diving", "3m"],
                ["2", "1992", "Judo", "Open"],
                ["1", "1996", "Swimming", "100m"],
            ]),
        );
        let out = dedup_with_participation_counts(&t, &["id"], "year", "sport", "event").unwrap();
        assert_eq!(out.n_rows(), 3);
        let aos = out.column_index(AOS).unwrap();
        let aoe = out.column_index(AOE).unwrap();
        let row = |r: usize| (out.cell_text(r, aos).unwrap(), out.cell_text(r, aoe).unwrap());
        assert_eq!(row(0), ("2".to_string(), "3".to_string()));
        assert_eq!(row(1), ("1".to_string(), "1".to_string()));
        assert_eq!(row(2), ("1".to_string(), "1".to_string()));
        assert_eq!(out.cell_text(2, 1).unwrap(), "1996");
    }

    #[test]
    fn dedup_reports_missing_identity_rows() {
        let t = table(
            &["id", "year", "sport", "event"],
            records(&[["1", "1992", "S", "E"], ["NA", "1992", "S", "E"]]),
        );
        let err = dedup_with_participation_counts(&t, &["id"], "year", "sport", "event").unwrap_err();
        assert!(err.to_string().contains("rows 2"), "{err}");
    }

    #[test]
    fn census_fill_rules() {
        let rows = records(&[
            ["20", "Sales", "US"],
            ["NA", "?", "US"],
            ["40", "Tech", "US"],
            ["30", "Tech", "US"],
        ]);
        let mut t = table(&["age", "occupation", "country"], rows);
        t.coerce_continuous("age").unwrap();
        let out = prepare_census(&t).unwrap();
        assert_eq!(out.column(0).as_continuous().unwrap()[1], Some(30.0));
        assert_eq!(out.cell_text(1, 1).unwrap(), UNKNOWN);
        assert_eq!(out.spec(2), t.spec(2));
        assert!(!out.has_missing());

        // "?" kept as a literal category when not loaded as missing
        let lit = DataTable::from_records(
            &header(&["occupation"]),
            records(&[["?"], ["Sales"]]),
            None,
            &MissingTokens::new([""]),
        )
        .unwrap();
        let out = prepare_census(&lit).unwrap();
        assert_eq!(out.spec(0).categories, vec!["Sales", UNKNOWN]);
    }

    #[test]
    fn olympic_missing_column_is_named() {
        let t = table(&["age", "sex"], records(&[["20", "M"]]));
        let err = prepare_olympic(&t).unwrap_err();
        assert!(err.to_string().contains("height"), "{err}");
    }
}
