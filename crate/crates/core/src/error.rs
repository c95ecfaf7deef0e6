use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value {value} at row {row}, column {column}")]
    NonFinite {
        row: usize,
        column: usize,
        value: f64,
    },

    #[error("dimension mismatch: expected dim={expected}, got dim={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("budget overspend: consuming {requested} on top of {consumed} exceeds total {total}")]
    BudgetExceeded {
        consumed: f64,
        requested: f64,
        total: f64,
    },

    #[error(
        "initial centroid selection failed for {target_count} centroids in d={dim}: \
         separation parameter fell to {last_attempted_a}, below floor {floor}"
    )]
    InitializationFailed {
        target_count: usize,
        dim: usize,
        last_attempted_a: f64,
        floor: f64,
    },

    #[error("cannot merge down to k={k}: only {active} clusters available")]
    MergeTarget { k: usize, active: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: column `{column}` not found in header")]
    UnknownColumn { path: PathBuf, column: String },

    #[error("{path}: column `{column}` contains no numeric values")]
    NonNumericColumn { path: PathBuf, column: String },

    #[error("{path}: no usable rows ({dropped} dropped)")]
    NoUsableRows { path: PathBuf, dropped: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
