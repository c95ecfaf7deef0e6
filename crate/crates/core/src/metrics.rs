//! Clustering utility: normalized intra-cluster variance.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CentroidSet, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NicvMode {
    /// Mean squared distance to the nearest centroid.
    #[default]
    Squared,
    /// Mean (unsquared) Euclidean distance to the nearest centroid.
    Literal,
}

impl NicvMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NicvMode::Squared => "squared",
            NicvMode::Literal => "literal",
        }
    }
}

impl fmt::Display for NicvMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NicvMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "squared" => Ok(NicvMode::Squared),
            "literal" => Ok(NicvMode::Literal),
            other => Err(format!(
                "unknown nicv mode `{other}` (expected squared|literal)"
            )),
        }
    }
}

/// Assigns every point to its nearest centroid and averages the per-point
/// (squared, by default) distance over the dataset.
pub fn nicv(ds: &Dataset, cs: &CentroidSet, mode: NicvMode) -> Result<f64> {
    if cs.dim() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            got: cs.dim(),
        });
    }
    let total: f64 = ds
        .points()
        .map(|x| {
            let (_, d2) = cs.nearest(x);
            match mode {
                NicvMode::Squared => d2,
                NicvMode::Literal => d2.sqrt(),
            }
        })
        .sum();
    Ok(total / ds.len() as f64)
}
