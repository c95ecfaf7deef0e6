//! Shared domain types: normalized datasets, centroid sets and nearest-centroid
//! assignments, plus the non-private building blocks of a Lloyd iteration.

use serde::Serialize;

use crate::error::{Error, Result};

/// A normalized numeric dataset. Every coordinate lies in `[-r, r]`.
///
/// Points are stored row-major in one contiguous buffer; `point(i)` yields the
/// `i`-th point as a slice of length `dim`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    name: String,
    dim: usize,
    r: f64,
    values: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from already-normalized points.
    pub fn new(name: impl Into<String>, points: Vec<Vec<f64>>, r: f64) -> Result<Self> {
        check_half_width(r)?;
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or(Error::EmptyInput("dataset"))?;
        if dim == 0 {
            return Err(Error::EmptyInput("point coordinates"));
        }
        let mut values = Vec::with_capacity(points.len() * dim);
        for (row, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            for (column, &v) in p.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        row,
                        column,
                        value: v,
                    });
                }
                if v.abs() > r {
                    return Err(Error::invalid(
                        "points",
                        format!("coordinate {v} at row {row}, column {column} outside [-{r}, {r}]"),
                    ));
                }
            }
            values.extend_from_slice(p);
        }
        Ok(Self {
            name: name.into(),
            dim,
            r,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Domain half-width.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }
}

fn check_half_width(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "r",
            format!("domain half-width must be positive and finite, got {r}"),
        ))
    }
}

/// Min-max normalizes every column of `raw` onto `[-r, r]`.
///
/// Constant columns map to 0. A column that already spans exactly `[-r, r]`
/// is left untouched, so normalizing twice is a fixed point.
pub fn normalize(name: impl Into<String>, raw: &[Vec<f64>], r: f64) -> Result<Dataset> {
    check_half_width(r)?;
    let dim = raw
        .first()
        .map(Vec::len)
        .ok_or(Error::EmptyInput("table"))?;
    if dim == 0 {
        return Err(Error::EmptyInput("table columns"));
    }
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for (row, values) in raw.iter().enumerate() {
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.len(),
            });
        }
        for (column, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    column,
                    value: v,
                });
            }
            lo[column] = lo[column].min(v);
            hi[column] = hi[column].max(v);
        }
    }

    let mut values = Vec::with_capacity(raw.len() * dim);
    for row in raw {
        for (column, &v) in row.iter().enumerate() {
            let (min, max) = (lo[column], hi[column]);
            let scaled = if min == max {
                0.0
            } else if min == -r && max == r {
                v
            } else {
                (-r + 2.0 * r * (v - min) / (max - min)).clamp(-r, r)
            };
            values.push(scaled);
        }
    }
    Ok(Dataset {
        name: name.into(),
        dim,
        r,
        values,
    })
}

/// Euclidean distance between two points of equal dimensionality.
pub fn distance(x: &[f64], c: &[f64]) -> Result<f64> {
    if x.len() != c.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: c.len(),
        });
    }
    Ok(squared_distance(x, c).sqrt())
}

#[inline]
pub(crate) fn squared_distance(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// An ordered, non-empty list of centroids sharing one dimensionality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentroidSet {
    dim: usize,
    centroids: Vec<Vec<f64>>,
}

impl CentroidSet {
    pub fn new(centroids: Vec<Vec<f64>>) -> Result<Self> {
        let dim = centroids
            .first()
            .map(Vec::len)
            .ok_or(Error::EmptyInput("centroid set"))?;
        if dim == 0 {
            return Err(Error::EmptyInput("centroid coordinates"));
        }
        if let Some(bad) = centroids.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(Self { dim, centroids })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_effective(&self) -> usize {
        self.centroids.len()
    }

    pub fn get(&self, j: usize) -> &[f64] {
        &self.centroids[j]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.centroids.iter().map(Vec::as_slice)
    }

    pub fn as_slice(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.centroids
    }

    /// Index and squared distance of the centroid nearest to `x`; ties go to
    /// the lowest index.
    pub(crate) fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (j, c) in self.centroids.iter().enumerate() {
            let d2 = squared_distance(x, c);
            if d2 < best.1 {
                best = (j, d2);
            }
        }
        best
    }
}

/// Nearest-centroid assignment of every point in a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub cluster_of: Vec<usize>,
    pub min_dist: Vec<f64>,
}

impl Assignment {
    pub fn len(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cluster_of.is_empty()
    }
}

/// Maps each point to its nearest centroid by L2 distance.
pub fn assign_points(ds: &Dataset, cs: &CentroidSet) -> Result<Assignment> {
    if cs.dim() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            got: cs.dim(),
        });
    }
    let (cluster_of, min_dist) = ds
        .points()
        .map(|x| {
            let (j, d2) = cs.nearest(x);
            (j, d2.sqrt())
        })
        .unzip();
    Ok(Assignment {
        cluster_of,
        min_dist,
    })
}

/// Per-cluster coordinate sums and member counts.
pub(crate) fn cluster_sums(ds: &Dataset, a: &Assignment, k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut sums = vec![vec![0.0; ds.dim()]; k];
    let mut counts = vec![0usize; k];
    for (x, &j) in ds.points().zip(&a.cluster_of) {
        counts[j] += 1;
        for (s, v) in sums[j].iter_mut().zip(x) {
            *s += v;
        }
    }
    (sums, counts)
}

/// Non-private centroid update: each centroid becomes the mean of its members.
/// Empty clusters keep their centroid from `previous`.
pub fn true_centroid_update(
    ds: &Dataset,
    a: &Assignment,
    previous: &CentroidSet,
) -> Result<CentroidSet> {
    let k = previous.k_effective();
    if a.len() != ds.len() {
        return Err(Error::DimensionMismatch {
            expected: ds.len(),
            got: a.len(),
        });
    }
    if let Some(&j) = a.cluster_of.iter().find(|&&j| j >= k) {
        return Err(Error::invalid(
            "assignment",
            format!("cluster index {j} out of range for {k} centroids"),
        ));
    }
    let (sums, counts) = cluster_sums(ds, a, k);
    let centroids = sums
        .into_iter()
        .zip(counts)
        .zip(previous.iter())
        .map(|((sum, n), prev)| {
            if n == 0 {
                prev.to_vec()
            } else {
                sum.into_iter().map(|s| s / n as f64).collect()
            }
        })
        .collect();
    CentroidSet::new(centroids)
}
