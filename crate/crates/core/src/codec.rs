//! Continuous normalizers and one-hot encoding between [`DataTable`] and
//! [`EncodedMatrix`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Matrix;
use crate::table::{ColumnData, ColumnKind, ColumnSpec, DataTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMethod {
    MaxAbsolute,
    #[default]
    MinMax,
    Standardization,
}

impl fmt::Display for NormalizationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalizationMethod::MaxAbsolute => "max_absolute",
            NormalizationMethod::MinMax => "min_max",
            NormalizationMethod::Standardization => "standardization",
        })
    }
}

impl core::str::FromStr for NormalizationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max_absolute" | "max-absolute" => Ok(Self::MaxAbsolute),
            "min_max" | "min-max" => Ok(Self::MinMax),
            "standardization" => Ok(Self::Standardization),
            other => Err(Error::Argument(format!("unknown normalization method `{other}`"))),
        }
    }
}

/// Statistics of the real column. Only the fields used by `method` are
/// meaningful; the others are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizerParams {
    pub method: NormalizationMethod,
    pub min: f64,
    pub max: f64,
    pub max_abs: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

pub fn fit_normalizer(values: &[f64], method: NormalizationMethod) -> Result<NormalizerParams> {
    NormalizerParams::fit("<unnamed>", values, method)
}

impl NormalizerParams {
    pub fn fit(column: &str, values: &[f64], method: NormalizationMethod) -> Result<Self> {
        let fail = |reason: &str| Error::Fit {
            method,
            column: column.to_string(),
            reason: reason.to_string(),
        };
        if values.len() < 2 {
            return Err(fail("needs at least two values"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(fail("values must be finite"));
        }
        let mut p = Self {
            method,
            min: 0.0,
            max: 0.0,
            max_abs: 0.0,
            mean: 0.0,
            std: 0.0,
        };
        match method {
            NormalizationMethod::MinMax => {
                p.min = values.iter().copied().fold(f64::INFINITY, f64::min);
                p.max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if !(p.max > p.min) {
                    return Err(fail("all values are equal"));
                }
            }
            NormalizationMethod::MaxAbsolute => {
                p.max_abs = values.iter().map(|v| libm::fabs(*v)).fold(0.0, f64::max);
                if !(p.max_abs > 0.0) {
                    return Err(fail("all values are zero"));
                }
            }
            NormalizationMethod::Standardization => {
                let n = values.len() as f64;
                p.mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - p.mean) * (v - p.mean)).sum::<f64>() / n;
                p.std = libm::sqrt(var);
                if !(p.std > 0.0) {
                    return Err(fail("variance is zero"));
                }
            }
        }
        Ok(p)
    }

    pub fn normalize(&self, x: f64) -> f64 {
        match self.method {
            NormalizationMethod::MinMax => (x - self.min) / (self.max - self.min),
            NormalizationMethod::MaxAbsolute => x / self.max_abs,
            NormalizationMethod::Standardization => (x - self.mean) / self.std,
        }
    }

    /// Inverse of [`normalize`](Self::normalize). Min-max inputs are clamped
    /// to `[0, 1]` first so generated values stay in the real range.
    pub fn denormalize(&self, y: f64) -> f64 {
        match self.method {
            NormalizationMethod::MinMax => self.min + y.clamp(0.0, 1.0) * (self.max - self.min),
            NormalizationMethod::MaxAbsolute => y * self.max_abs,
            NormalizationMethod::Standardization => y * self.std + self.mean,
        }
    }
}

/// Normalization method per continuous column: a default plus overrides by
/// column name.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalizationPlan {
    pub default: NormalizationMethod,
    pub overrides: BTreeMap<String, NormalizationMethod>,
}

impl NormalizationPlan {
    pub fn uniform(method: NormalizationMethod) -> Self {
        Self {
            default: method,
            overrides: BTreeMap::new(),
        }
    }

    pub fn method_for(&self, column: &str) -> NormalizationMethod {
        self.overrides.get(column).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BlockKind {
    /// One scalar entry.
    Continuous { method: NormalizationMethod },
    /// One-hot span.
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub offset: usize,
    pub width: usize,
    pub kind: BlockKind,
}

/// Contiguous spans of the encoded row, one per schema column, in schema order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    blocks: Vec<Block>,
    width: usize,
}

impl BlockLayout {
    pub fn new(schema: &[ColumnSpec], plan: &NormalizationPlan) -> Self {
        let mut blocks = Vec::with_capacity(schema.len());
        let mut offset = 0;
        for spec in schema {
            let (width, kind) = match spec.kind {
                ColumnKind::Continuous => (
                    1,
                    BlockKind::Continuous {
                        method: plan.method_for(&spec.name),
                    },
                ),
                ColumnKind::Categorical => (spec.categories.len(), BlockKind::Categorical),
            };
            blocks.push(Block { offset, width, kind });
            offset += width;
        }
        Self { blocks, width: offset }
    }

    /// Layout matching already-fitted codec parameters.
    pub fn from_codec(schema: &[ColumnSpec], codec: &FittedCodec) -> Result<Self> {
        if codec.columns.len() != schema.len() {
            return Err(Error::Decode(format!(
                "codec has {} columns, schema has {}",
                codec.columns.len(),
                schema.len()
            )));
        }
        let mut plan = NormalizationPlan::default();
        for (spec, p) in schema.iter().zip(&codec.columns) {
            match (spec.kind, p) {
                (ColumnKind::Continuous, Some(p)) => {
                    plan.overrides.insert(spec.name.clone(), p.method);
                }
                (ColumnKind::Categorical, None) => {}
                _ => {
                    return Err(Error::Decode(format!(
                        "codec entry for column `{}` does not match its kind",
                        spec.name
                    )))
                }
            }
        }
        Ok(Self::new(schema, &plan))
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

/// Fitted normalizer per column; `None` for categorical columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedCodec {
    pub columns: Vec<Option<NormalizerParams>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub layout: BlockLayout,
    pub data: Matrix,
}

/// Fits normalizers on the table and encodes it.
pub fn encode_table(table: &DataTable, plan: &NormalizationPlan) -> Result<(EncodedMatrix, FittedCodec)> {
    if let Some((row, col)) = table.first_missing() {
        return Err(Error::Encode {
            row: row + 1,
            column: table.spec(col).name.clone(),
            message: "cell is missing".to_string(),
        });
    }
    let mut columns = Vec::with_capacity(table.n_cols());
    for (spec, data) in table.schema().iter().zip(table.columns()) {
        columns.push(match data {
            ColumnData::Continuous(v) => {
                let values: Vec<f64> = v.iter().flatten().copied().collect();
                Some(NormalizerParams::fit(&spec.name, &values, plan.method_for(&spec.name))?)
            }
            ColumnData::Categorical(_) => None,
        });
    }
    let codec = FittedCodec { columns };
    let encoded = encode_with(table, &codec)?;
    Ok((encoded, codec))
}

/// Encodes a table with previously fitted parameters.
pub fn encode_with(table: &DataTable, codec: &FittedCodec) -> Result<EncodedMatrix> {
    let layout = BlockLayout::from_codec(table.schema(), codec)?;
    let mut data = Matrix::zeros(table.n_rows(), layout.width());
    for (c, (block, col)) in layout.blocks().iter().zip(table.columns()).enumerate() {
        let missing = |row: usize| Error::Encode {
            row: row + 1,
            column: table.spec(c).name.clone(),
            message: "cell is missing".to_string(),
        };
        match col {
            ColumnData::Continuous(v) => {
                let p = codec.columns[c].as_ref().expect("layout checked kinds");
                for (r, x) in v.iter().enumerate() {
                    let x = x.ok_or_else(|| missing(r))?;
                    data.set(r, block.offset, p.normalize(x));
                }
            }
            ColumnData::Categorical(v) => {
                for (r, k) in v.iter().enumerate() {
                    let k = k.ok_or_else(|| missing(r))?;
                    data.set(r, block.offset + k as usize, 1.0);
                }
            }
        }
    }
    Ok(EncodedMatrix { layout, data })
}

/// Decodes with argmax per categorical block; ties go to the lowest index.
pub fn decode_matrix(m: &EncodedMatrix, schema: &[ColumnSpec], codec: &FittedCodec) -> Result<DataTable> {
    decode_impl(m, schema, codec, |block: &[f64]| argmax(block))
}

/// Decodes by sampling each categorical block in proportion to its
/// non-negative entries, falling back to argmax when they sum to zero.
pub fn decode_matrix_sampled<R: Rng + ?Sized>(
    m: &EncodedMatrix,
    schema: &[ColumnSpec],
    codec: &FittedCodec,
    rng: &mut R,
) -> Result<DataTable> {
    decode_impl(m, schema, codec, |block: &[f64]| {
        let total: f64 = block.iter().map(|v| v.max(0.0)).sum();
        if !(total > 0.0) || !total.is_finite() {
            return argmax(block);
        }
        let mut u = rng.random::<f64>() * total;
        for (i, v) in block.iter().enumerate() {
            let w = v.max(0.0);
            if u < w {
                return i;
            }
            u -= w;
        }
        // rounding can leave u just above the last positive weight
        block.iter().rposition(|v| *v > 0.0).unwrap_or(0)
    })
}

fn argmax(block: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in block.iter().enumerate() {
        // NaN never wins
        if v > block[best] || (block[best].is_nan() && !v.is_nan()) {
            best = i;
        }
    }
    best
}

fn decode_impl(
    m: &EncodedMatrix,
    schema: &[ColumnSpec],
    codec: &FittedCodec,
    mut pick: impl FnMut(&[f64]) -> usize,
) -> Result<DataTable> {
    let layout = BlockLayout::from_codec(schema, codec)?;
    if layout != m.layout || m.data.cols() != layout.width() {
        return Err(Error::Decode(format!(
            "matrix layout (width {}) does not match the schema layout (width {})",
            m.data.cols(),
            layout.width()
        )));
    }
    let n = m.data.rows();
    let mut columns = Vec::with_capacity(schema.len());
    for (c, block) in layout.blocks().iter().enumerate() {
        columns.push(match block.kind {
            BlockKind::Continuous { .. } => {
                let p = codec.columns[c].as_ref().expect("layout checked kinds");
                let mut out = Vec::with_capacity(n);
                for r in 0..n {
                    let y = m.data.get(r, block.offset);
                    let x = p.denormalize(y);
                    if !x.is_finite() {
                        return Err(Error::Decode(format!(
                            "row {} column `{}` decodes to a non-finite value",
                            r + 1,
                            schema[c].name
                        )));
                    }
                    out.push(Some(x));
                }
                ColumnData::Continuous(out)
            }
            BlockKind::Categorical => ColumnData::Categorical(
                (0..n)
                    .map(|r| {
                        let row = m.data.row(r);
                        Some(pick(&row[block.offset..block.offset + block.width]) as u32)
                    })
                    .collect(),
            ),
        });
    }
    DataTable::new(schema.to_vec(), columns)
}
