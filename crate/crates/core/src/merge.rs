//! Post-processing that folds `n·k` noisy clusters down to `k`.
//!
//! The two clusters with the closest noisy centroids are merged repeatedly.
//! Per dimension, the merged coordinate starts at the smaller of the two
//! coordinates and moves towards the larger one by the fraction of the total
//! noisy count held by the cluster owning the larger coordinate. That is the
//! count-weighted mean of the two centroids. No data is touched, so merging
//! spends no budget.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{squared_distance, CentroidSet};

/// Smallest weight a cluster may carry into a merge.
pub const MIN_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeState {
    centroids: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl MergeState {
    /// Pairs centroids with their noisy counts, clamping each count to at least
    /// [`MIN_WEIGHT`].
    pub fn new(centroids: CentroidSet, noisy_counts: &[f64]) -> Result<Self> {
        if noisy_counts.len() != centroids.k_effective() {
            return Err(Error::DimensionMismatch {
                expected: centroids.k_effective(),
                got: noisy_counts.len(),
            });
        }
        if let Some(bad) = noisy_counts.iter().find(|w| !w.is_finite()) {
            return Err(Error::invalid(
                "noisy count",
                format!("must be finite, got {bad}"),
            ));
        }
        Ok(Self {
            centroids: centroids.into_inner(),
            weights: noisy_counts.iter().map(|&w| w.max(MIN_WEIGHT)).collect(),
        })
    }

    pub fn active_count(&self) -> usize {
        self.centroids.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    /// Indices of the closest pair, ties broken by the lexicographically
    /// smallest `(p, q)`.
    fn closest_pair(&self) -> (usize, usize) {
        let mut best = (0, 1, f64::INFINITY);
        for p in 0..self.centroids.len() {
            for q in p + 1..self.centroids.len() {
                let d2 = squared_distance(&self.centroids[p], &self.centroids[q]);
                if d2 < best.2 {
                    best = (p, q, d2);
                }
            }
        }
        (best.0, best.1)
    }

    /// Merges the closest pair in place; the result takes the lower index.
    fn merge_closest(&mut self) -> Result<()> {
        let (p, q) = self.closest_pair();
        let (merged, weight) = merge_pair(
            &self.centroids[p],
            &self.centroids[q],
            self.weights[p],
            self.weights[q],
        )?;
        self.centroids[p] = merged;
        self.weights[p] = weight;
        self.centroids.remove(q);
        self.weights.remove(q);
        Ok(())
    }
}

/// Merges two weighted centroids coordinate by coordinate.
///
/// Returns the merged centroid and the combined weight `w_p + w_q`.
pub fn merge_pair(p: &[f64], q: &[f64], w_p: f64, w_q: f64) -> Result<(Vec<f64>, f64)> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    for w in [w_p, w_q] {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::invalid(
                "merge weight",
                format!("must be positive and finite, got {w}"),
            ));
        }
    }
    let total = w_p + w_q;
    let merged = p
        .iter()
        .zip(q)
        .map(|(&cp, &cq)| {
            // the cluster owning the larger coordinate pulls the result towards it
            let w_larger = if cp >= cq { w_p } else { w_q };
            (cp.min(cq) + (cp - cq).abs() * (w_larger / total)).min(cp.max(cq))
        })
        .collect();
    Ok((merged, total))
}

/// Repeatedly merges the nearest pair until exactly `k` clusters remain.
pub fn merge_to_k(state: MergeState, k: usize) -> Result<CentroidSet> {
    merge_to_k_weighted(state, k).map(|(centroids, _)| centroids)
}

/// Like [`merge_to_k`] but also returns the surviving weights.
pub fn merge_to_k_weighted(mut state: MergeState, k: usize) -> Result<(CentroidSet, Vec<f64>)> {
    if k == 0 || k > state.active_count() {
        return Err(Error::MergeTarget {
            k,
            active: state.active_count(),
        });
    }
    while state.active_count() > k {
        state.merge_closest()?;
    }
    Ok((CentroidSet::new(state.centroids)?, state.weights))
}
