use alloc::string::String;

use crate::codec::NormalizationMethod;

/// Errors produced by the core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// `row` is the 1-based data row (the header is not counted).
    #[error("parse error at row {row}{}: {message}", column.as_ref().map(|c| alloc::format!(", column `{c}`")).unwrap_or_default())]
    Parse {
        row: usize,
        column: Option<String>,
        message: String,
    },

    #[error("imputation error: {0}")]
    Imputation(String),

    #[error("column `{column}` is not {expected}")]
    ColumnType {
        column: String,
        expected: &'static str,
    },

    #[error("no column named `{0}`")]
    UnknownColumn(String),

    #[error("preparation error: {0}")]
    Preparation(String),

    #[error("cannot fit {method} normalizer for column `{column}`: {reason}")]
    Fit {
        method: NormalizationMethod,
        column: String,
        reason: String,
    },

    #[error("encode error at row {row}, column `{column}`: {message}")]
    Encode {
        row: usize,
        column: String,
        message: String,
    },

    #[error("decode error: {0}")]
    Decode(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn shape(op: &'static str, detail: String) -> Error {
    Error::Shape { op, detail }
}
