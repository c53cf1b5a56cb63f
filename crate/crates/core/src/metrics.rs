//! Column-shape and pair-trend similarity between a real and a synthetic table.
//!
//! Every score lies in `[0, 1]`; 1 means the two distributions agree.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{ColumnData, ColumnKind, ColumnSpec, DataTable};

fn non_empty<T>(real: &[T], synth: &[T], metric: &str) -> Result<()> {
    if real.is_empty() || synth.is_empty() {
        return Err(Error::Argument(format!("{metric} needs non-empty real and synthetic samples")));
    }
    Ok(())
}

/// `1 - sup |F_real - F_synth|` over the pooled sample points.
pub fn ks_complement(real: &[f64], synth: &[f64]) -> Result<f64> {
    non_empty(real, synth, "ks_complement")?;
    if real.iter().chain(synth).any(|v| v.is_nan()) {
        return Err(Error::Argument("ks_complement got a NaN".to_string()));
    }
    let mut a = real.to_vec();
    let mut b = synth.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut worst = 0.0_f64;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        worst = worst.max(libm::fabs(i as f64 / n - j as f64 / m));
    }
    Ok(1.0 - worst)
}

/// `1 - ½ Σ_c |p_real(c) - p_synth(c)|` over the union of categories.
pub fn tv_complement<T: Ord>(real: &[T], synth: &[T]) -> Result<f64> {
    non_empty(real, synth, "tv_complement")?;
    let mut counts: BTreeMap<&T, (usize, usize)> = BTreeMap::new();
    for v in real {
        counts.entry(v).or_default().0 += 1;
    }
    for v in synth {
        counts.entry(v).or_default().1 += 1;
    }
    Ok(one_minus_half_l1(counts.values(), real.len(), synth.len()))
}

fn one_minus_half_l1<'a>(counts: impl Iterator<Item = &'a (usize, usize)>, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    let l1: f64 = counts.map(|&(r, s)| libm::fabs(r as f64 / n - s as f64 / m)).sum();
    (1.0 - 0.5 * l1).clamp(0.0, 1.0)
}

/// Pearson correlation, or `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return None;
    }
    Some((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

fn check_pair_lengths(x: usize, y: usize, which: &str) -> Result<()> {
    if x != y {
        return Err(Error::Argument(format!("{which} pair has lengths {x} and {y}")));
    }
    Ok(())
}

/// `1 - |ρ_real - ρ_synth| / 2` with Pearson ρ.
pub fn correlation_similarity(real_x: &[f64], real_y: &[f64], synth_x: &[f64], synth_y: &[f64]) -> Result<f64> {
    check_pair_lengths(real_x.len(), real_y.len(), "real")?;
    check_pair_lengths(synth_x.len(), synth_y.len(), "synthetic")?;
    if real_x.len() < 2 || synth_x.len() < 2 {
        return Err(Error::Argument("correlation_similarity needs at least two rows per dataset".to_string()));
    }
    for (name, v) in [("real x", real_x), ("real y", real_y), ("synthetic x", synth_x), ("synthetic y", synth_y)] {
        if v.iter().all(|&a| a == v[0]) {
            return Err(Error::Metric(format!("column `{name}` has zero variance")));
        }
    }
    let r = pearson(real_x, real_y).expect("variance checked");
    let s = pearson(synth_x, synth_y).expect("variance checked");
    Ok(1.0 - libm::fabs(r - s) / 2.0)
}

/// `1 - ½ Σ_(a,b) |f_real(a,b) - f_synth(a,b)|` over joint relative frequencies.
pub fn contingency_similarity<A: Ord, B: Ord>(real_a: &[A], real_b: &[B], synth_a: &[A], synth_b: &[B]) -> Result<f64> {
    check_pair_lengths(real_a.len(), real_b.len(), "real")?;
    check_pair_lengths(synth_a.len(), synth_b.len(), "synthetic")?;
    non_empty(real_a, synth_a, "contingency_similarity")?;
    let mut counts: BTreeMap<(&A, &B), (usize, usize)> = BTreeMap::new();
    for pair in real_a.iter().zip(real_b) {
        counts.entry(pair).or_default().0 += 1;
    }
    for pair in synth_a.iter().zip(synth_b) {
        counts.entry(pair).or_default().1 += 1;
    }
    Ok(one_minus_half_l1(counts.values(), real_a.len(), synth_a.len()))
}

/// A: continuous. B: categorical with few categories. C: categorical with many.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColumnType {
    A,
    B,
    C,
}

pub const DEFAULT_SMALL_THRESHOLD: usize = 15;
pub const DEFAULT_MIXED_BINS: usize = 10;

pub fn classify_column_type(spec: &ColumnSpec, small_threshold: usize) -> ColumnType {
    match spec.kind {
        ColumnKind::Continuous => ColumnType::A,
        ColumnKind::Categorical if spec.categories.len() <= small_threshold => ColumnType::B,
        ColumnKind::Categorical => ColumnType::C,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalOptions {
    /// Largest category count still classed as type B.
    pub small_threshold: usize,
    /// Equal-width bins for the continuous member of a mixed pair.
    pub bins: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            small_threshold: DEFAULT_SMALL_THRESHOLD,
            bins: DEFAULT_MIXED_BINS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    KSComplement,
    TVComplement,
    CorrelationSimilarity,
    ContingencySimilarity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScore {
    pub name: String,
    pub kind: ColumnKind,
    pub column_type: ColumnType,
    pub metric: Metric,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub shape: f64,
    pub pair_trend: Option<f64>,
    /// Mean of `shape` and `pair_trend` (just `shape` for single-column tables).
    pub overall: f64,
    pub continuous_shape: Option<f64>,
    pub categorical_shape: Option<f64>,
    /// Pairs where both columns are continuous.
    pub continuous_pair_trend: Option<f64>,
    /// Pairs where both columns are categorical.
    pub categorical_pair_trend: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub columns: Vec<ColumnScore>,
    /// Symmetric pair-trend matrix; the diagonal is `None`.
    pub pairs: Vec<Vec<Option<f64>>>,
    pub averages: Averages,
    /// Mean pair score per unordered column-type pair (`"AA"`, `"AB"`, ...),
    /// present only when the table has such a pair.
    pub type_pairs: BTreeMap<String, f64>,
}

impl FidelityReport {
    pub fn overall(&self) -> f64 {
        self.averages.overall
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Present values of a column, or the whole column as category indices.
enum Present {
    Num(Vec<f64>),
    Cat(Vec<u32>),
}

fn present(data: &ColumnData, rows: &[usize]) -> Present {
    match data {
        ColumnData::Continuous(v) => Present::Num(rows.iter().map(|&r| v[r].expect("row filtered")).collect()),
        ColumnData::Categorical(v) => Present::Cat(rows.iter().map(|&r| v[r].expect("row filtered")).collect()),
    }
}

fn rows_present(table: &DataTable, cols: &[usize]) -> Vec<usize> {
    (0..table.n_rows())
        .filter(|&r| cols.iter().all(|&c| !table.column(c).is_missing(r)))
        .collect()
}

/// Equal-width bins over `[lo, hi]`; values outside land in the edge bins.
fn discretize(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u32> {
    let span = hi - lo;
    values
        .iter()
        .map(|&x| {
            if !(span > 0.0) {
                return 0;
            }
            let b = libm::floor((x - lo) / span * bins as f64);
            b.clamp(0.0, (bins - 1) as f64) as u32
        })
        .collect()
}

fn pair_score(real: &DataTable, synth: &DataTable, i: usize, j: usize, opts: &EvalOptions) -> Result<f64> {
    let rr = rows_present(real, &[i, j]);
    let sr = rows_present(synth, &[i, j]);
    if rr.is_empty() || sr.is_empty() {
        return Err(Error::Evaluation(format!(
            "columns `{}` and `{}` have no complete rows to compare",
            real.spec(i).name,
            real.spec(j).name
        )));
    }
    let real_range = |c: usize| -> (f64, f64) {
        let v = real.column(c).as_continuous().expect("continuous");
        v.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    };
    let (ri, rj, si, sj) = (
        present(real.column(i), &rr),
        present(real.column(j), &rr),
        present(synth.column(i), &sr),
        present(synth.column(j), &sr),
    );
    match (ri, rj, si, sj) {
        (Present::Num(rx), Present::Num(ry), Present::Num(sx), Present::Num(sy)) => {
            // an undefined correlation counts as zero correlation
            let r = if rx.len() >= 2 { pearson(&rx, &ry).unwrap_or(0.0) } else { 0.0 };
            let s = if sx.len() >= 2 { pearson(&sx, &sy).unwrap_or(0.0) } else { 0.0 };
            Ok(1.0 - libm::fabs(r - s) / 2.0)
        }
        (Present::Cat(rx), Present::Cat(ry), Present::Cat(sx), Present::Cat(sy)) => {
            contingency_similarity(&rx, &ry, &sx, &sy)
        }
        (Present::Num(rx), Present::Cat(ry), Present::Num(sx), Present::Cat(sy)) => {
            let (lo, hi) = real_range(i);
            contingency_similarity(
                &discretize(&rx, lo, hi, opts.bins),
                &ry,
                &discretize(&sx, lo, hi, opts.bins),
                &sy,
            )
        }
        (Present::Cat(rx), Present::Num(ry), Present::Cat(sx), Present::Num(sy)) => {
            let (lo, hi) = real_range(j);
            contingency_similarity(
                &rx,
                &discretize(&ry, lo, hi, opts.bins),
                &sx,
                &discretize(&sy, lo, hi, opts.bins),
            )
        }
        _ => unreachable!("schemas are identical"),
    }
}

/// Scores every column and every unordered column pair of `synth` against `real`.
///
/// Missing cells are skipped: shape scores use the present cells of each
/// column, pair scores the rows where both cells are present.
pub fn evaluate_all(real: &DataTable, synth: &DataTable, opts: &EvalOptions) -> Result<FidelityReport> {
    if real.schema() != synth.schema() {
        return Err(Error::Evaluation("real and synthetic schemas differ".to_string()));
    }
    if real.n_cols() == 0 {
        return Err(Error::Evaluation("tables have no columns".to_string()));
    }
    if opts.bins == 0 {
        return Err(Error::Argument("bins must be at least 1".to_string()));
    }
    let ncols = real.n_cols();
    let types: Vec<ColumnType> = real.schema().iter().map(|s| classify_column_type(s, opts.small_threshold)).collect();

    let mut columns = Vec::with_capacity(ncols);
    for c in 0..ncols {
        let rr = rows_present(real, &[c]);
        let sr = rows_present(synth, &[c]);
        let name = real.spec(c).name.clone();
        if rr.is_empty() || sr.is_empty() {
            return Err(Error::Evaluation(format!("column `{name}` has no values to compare")));
        }
        let (metric, score) = match (present(real.column(c), &rr), present(synth.column(c), &sr)) {
            (Present::Num(r), Present::Num(s)) => (Metric::KSComplement, ks_complement(&r, &s)?),
            (Present::Cat(r), Present::Cat(s)) => (Metric::TVComplement, tv_complement(&r, &s)?),
            _ => unreachable!("schemas are identical"),
        };
        columns.push(ColumnScore {
            name,
            kind: real.spec(c).kind,
            column_type: types[c],
            metric,
            score,
        });
    }

    let mut pairs = vec![vec![None; ncols]; ncols];
    let mut all_pairs = Vec::new();
    let mut cont_pairs = Vec::new();
    let mut cat_pairs = Vec::new();
    let mut by_type: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for i in 0..ncols {
        for j in i + 1..ncols {
            let s = pair_score(real, synth, i, j, opts)?;
            pairs[i][j] = Some(s);
            pairs[j][i] = Some(s);
            all_pairs.push(s);
            match (real.spec(i).kind, real.spec(j).kind) {
                (ColumnKind::Continuous, ColumnKind::Continuous) => cont_pairs.push(s),
                (ColumnKind::Categorical, ColumnKind::Categorical) => cat_pairs.push(s),
                _ => {}
            }
            let (a, b) = if types[i] <= types[j] { (types[i], types[j]) } else { (types[j], types[i]) };
            by_type.entry(format!("{a:?}{b:?}")).or_default().push(s);
        }
    }

    let shape_scores: Vec<f64> = columns.iter().map(|c| c.score).collect();
    let of_kind = |k: ColumnKind| -> Vec<f64> { columns.iter().filter(|c| c.kind == k).map(|c| c.score).collect() };
    let shape = mean(&shape_scores).expect("at least one column");
    let pair_trend = mean(&all_pairs);
    let averages = Averages {
        shape,
        pair_trend,
        overall: pair_trend.map_or(shape, |p| (shape + p) / 2.0),
        continuous_shape: mean(&of_kind(ColumnKind::Continuous)),
        categorical_shape: mean(&of_kind(ColumnKind::Categorical)),
        continuous_pair_trend: mean(&cont_pairs),
        categorical_pair_trend: mean(&cat_pairs),
    };
    let type_pairs = by_type.into_iter().map(|(k, v)| (k, mean(&v).expect("non-empty"))).collect();

    Ok(FidelityReport {
        columns,
        pairs,
        averages,
        type_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_complement(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(ks_complement(&[0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(ks_complement(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 10.0]).unwrap(), 0.75);
        assert!(ks_complement(&[], &[1.0]).is_err());
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_complement(&["a", "b", "b"], &["b", "a", "b"]).unwrap(), 1.0);
        assert_eq!(tv_complement(&["A", "B"], &["A", "A", "A"]).unwrap(), 0.5);
        assert_eq!(tv_complement(&[1, 2], &[3, 4]).unwrap(), 0.0);
        assert!(tv_complement::<u32>(&[], &[1]).is_err());
    }

    #[test]
    fn correlation_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 1.0, 4.0, 3.0];
        assert_eq!(correlation_similarity(&x, &y, &x, &y).unwrap(), 1.0);
        let down = [4.0, 3.0, 2.0, 1.0];
        assert!(correlation_similarity(&x, &x, &x, &down).unwrap().abs() < 1e-15);
        // y = [2,1,4,3] against x = [1,2,3,4]: covariance 3, variances 5 and 5, so ρ = 0.6.
        // x2 = [1,2,3,4], y2 = [1,3,3,1]: covariance 0, so ρ = 0.
        let r = correlation_similarity(&x, &y, &x, &[1.0, 3.0, 3.0, 1.0]).unwrap();
        assert!((r - 0.7).abs() < 1e-12, "{r}");
    }

    #[test]
    fn correlation_half_against_zero() {
        // real: zero means, Σxy = 1, Σx² = Σy² = 2, so ρ = 0.5.
        let rx = [1.0, 0.0, -1.0, 0.0];
        let ry = [1.0, 0.0, 0.0, -1.0];
        // synthetic: Σxy = 0, so ρ = 0.
        let sx = [1.0, -1.0, 1.0, -1.0];
        let sy = [1.0, 1.0, -1.0, -1.0];
        assert!((correlation_similarity(&rx, &ry, &sx, &sy).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn correlation_zero_variance_is_an_error() {
        let c = [1.0, 1.0, 1.0];
        let v = [1.0, 2.0, 3.0];
        assert!(matches!(correlation_similarity(&c, &v, &v, &v), Err(Error::Metric(_))));
    }

    #[test]
    fn contingency_examples() {
        let a = ["A", "B"];
        let b = ["X", "Y"];
        assert_eq!(contingency_similarity(&a, &b, &a, &b).unwrap(), 1.0);
        assert_eq!(contingency_similarity(&a, &b, &["C"], &["Z"]).unwrap(), 0.0);
        let sa = ["A", "A", "B", "B"];
        let sb = ["X", "Y", "Y", "Y"];
        assert_eq!(contingency_similarity(&a, &b, &sa, &sb).unwrap(), 0.75);
        assert!(contingency_similarity(&a, &["X"], &a, &b).is_err());
    }

    #[test]
    fn column_types() {
        assert_eq!(classify_column_type(&ColumnSpec::continuous("age"), 15), ColumnType::A);
        assert_eq!(classify_column_type(&ColumnSpec::categorical("sex", ["M", "F"]), 15), ColumnType::B);
        let sports: Vec<String> = (0..40).map(|i| format!("s{i}")).collect();
        assert_eq!(classify_column_type(&ColumnSpec::categorical("sport", sports), 15), ColumnType::C);
    }

    #[test]
    fn discretize_clamps_to_edges() {
        assert_eq!(discretize(&[-5.0, 0.0, 0.95, 1.0, 7.0], 0.0, 1.0, 10), vec![0, 0, 9, 9, 9]);
        assert_eq!(discretize(&[3.0, 4.0], 2.0, 2.0, 10), vec![0, 0]);
    }
}
