//! The private Lloyd loop.
//!
//! Each iteration assigns points to the current centroids, releases noisy
//! per-cluster coordinate sums and counts through the Laplace mechanism, and
//! divides them to obtain the next centroids. The four benchmark variants
//! differ only in how many centroids are seeded (`k` or `n·k`) and in the
//! schedule used to split the budget across iterations.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::{
    build_schedule, global_sensitivity, laplace_sample, BudgetLedger, BudgetSchedule, LaplaceScale,
    SchedulePolicy,
};
use crate::model::{assign_points, cluster_sums, Assignment, CentroidSet, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    AverageK,
    AllocationK,
    AverageNk,
    AllocationNk,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::AverageK,
        Variant::AllocationK,
        Variant::AverageNk,
        Variant::AllocationNk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::AverageK => "average_k",
            Variant::AllocationK => "allocation_k",
            Variant::AverageNk => "average_nk",
            Variant::AllocationNk => "allocation_nk",
        }
    }

    /// Whether the variant over-seeds with `n·k` centroids and merges back to `k`.
    pub fn merges(self) -> bool {
        matches!(self, Variant::AverageNk | Variant::AllocationNk)
    }

    pub fn policy(self) -> SchedulePolicy {
        match self {
            Variant::AverageK | Variant::AverageNk => SchedulePolicy::Uniform,
            Variant::AllocationK | Variant::AllocationNk => SchedulePolicy::Adaptive,
        }
    }

    /// Stable numeric id used in seed derivation.
    pub fn id(self) -> u64 {
        match self {
            Variant::AverageK => 0,
            Variant::AllocationK => 1,
            Variant::AverageNk => 2,
            Variant::AllocationNk => 3,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "unknown variant `{s}` (expected average_k|allocation_k|average_nk|allocation_nk)"
                )
            })
    }
}

/// Whether noise is actually drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    On,
    /// Zero-noise oracle mode for testing: releases exact statistics while the
    /// ledger still records the budget each iteration would have spent.
    Off,
}

/// Sensitivity used for the noisy count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountNoise {
    /// Same `d·r + 1` scale as the sums.
    Global,
    /// Count-specific sensitivity of 1.
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantConfig {
    pub variant: Variant,
    pub k: usize,
    /// Over-seeding multiplier; always 1 for the `*_k` variants.
    pub n: usize,
    pub max_clustering: usize,
    pub epsilon: f64,
    pub schedule: SchedulePolicy,
    pub noise: NoiseMode,
    pub count_noise: CountNoise,
    pub seed: u64,
}

impl VariantConfig {
    pub const DEFAULT_N: usize = 3;
    pub const DEFAULT_ITERATIONS: usize = 12;

    pub fn new(variant: Variant, k: usize, epsilon: f64) -> Self {
        Self {
            variant,
            k,
            n: if variant.merges() { Self::DEFAULT_N } else { 1 },
            max_clustering: Self::DEFAULT_ITERATIONS,
            epsilon,
            schedule: variant.policy(),
            noise: NoiseMode::On,
            count_noise: CountNoise::Global,
            seed: 0,
        }
    }

    /// Sets the multiplier, forcing 1 for variants that do not merge.
    pub fn with_n(mut self, n: usize) -> Self {
        self.n = if self.variant.merges() { n } else { 1 };
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.max_clustering = iterations;
        self
    }

    pub fn with_noise(mut self, noise: NoiseMode) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_schedule(mut self, schedule: SchedulePolicy) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of centroids the loop runs with.
    pub fn initial_count(&self) -> usize {
        self.n * self.k
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if !self.variant.merges() && self.n != 1 {
            return Err(Error::invalid(
                "n",
                format!("{} requires n = 1", self.variant),
            ));
        }
        if self.max_clustering == 0 {
            return Err(Error::invalid("max_clustering", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(
                "epsilon",
                format!("must be positive and finite, got {}", self.epsilon),
            ));
        }
        Ok(())
    }

    pub fn build_schedule(&self) -> Result<BudgetSchedule> {
        build_schedule(self.epsilon, self.max_clustering, self.schedule)
    }
}

/// Noisy per-cluster statistics released in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisyClusterStat {
    pub noisy_sum: Vec<f64>,
    /// May be zero or negative once noise is added.
    pub noisy_count: f64,
}

/// Budget parameters for one iteration's release.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationBudget {
    /// 1-based iteration index.
    pub iteration: usize,
    pub epsilon: f64,
    pub sensitivity: f64,
}

/// Adds Laplace noise to every cluster's coordinate sums and member count.
///
/// Consumes `k_eff·(d+1)` draws, always in the order cluster-major, sums before
/// count, and records the release in `ledger`.
#[allow(clippy::too_many_arguments)]
pub fn noisy_stats<R: Rng + ?Sized>(
    ds: &Dataset,
    assignment: &Assignment,
    k_eff: usize,
    budget: IterationBudget,
    noise: NoiseMode,
    count_noise: CountNoise,
    ledger: &mut BudgetLedger,
    rng: &mut R,
) -> Result<Vec<NoisyClusterStat>> {
    if assignment.len() != ds.len() {
        return Err(Error::DimensionMismatch {
            expected: ds.len(),
            got: assignment.len(),
        });
    }
    if assignment.cluster_of.iter().any(|&j| j >= k_eff) {
        return Err(Error::invalid(
            "assignment",
            format!("cluster index out of range for k={k_eff}"),
        ));
    }
    let scale = LaplaceScale::for_query(budget.sensitivity, budget.epsilon)?;
    let count_scale = match count_noise {
        CountNoise::Global => scale,
        CountNoise::Unit => LaplaceScale::for_query(1.0, budget.epsilon)?,
    };
    let (sums, counts) = cluster_sums(ds, assignment, k_eff);
    let mut draw = |b: LaplaceScale| match noise {
        NoiseMode::On => laplace_sample(b, rng),
        NoiseMode::Off => 0.0,
    };
    let stats = sums
        .into_iter()
        .zip(counts)
        .map(|(sum, count)| {
            let noisy_sum = sum.into_iter().map(|s| s + draw(scale)).collect();
            let noisy_count = count as f64 + draw(count_scale);
            NoisyClusterStat {
                noisy_sum,
                noisy_count,
            }
        })
        .collect();
    ledger.record(
        budget.iteration,
        budget.epsilon,
        budget.sensitivity,
        k_eff * (ds.dim() + 1),
    )?;
    Ok(stats)
}

/// Divides noisy sums by noisy counts and clamps the result into `[-r, r]^d`.
///
/// A cluster whose noisy count falls below 1 keeps its previous centroid.
pub fn noisy_centroids(
    stats: &[NoisyClusterStat],
    previous: &CentroidSet,
    r: f64,
) -> Result<CentroidSet> {
    if stats.len() != previous.k_effective() {
        return Err(Error::DimensionMismatch {
            expected: previous.k_effective(),
            got: stats.len(),
        });
    }
    let centroids = stats
        .iter()
        .zip(previous.iter())
        .map(|(s, prev)| {
            if s.noisy_count < 1.0 {
                prev.to_vec()
            } else {
                s.noisy_sum
                    .iter()
                    .map(|v| (v / s.noisy_count).clamp(-r, r))
                    .collect()
            }
        })
        .collect();
    CentroidSet::new(centroids)
}

/// Result of a full private Lloyd run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LloydOutcome {
    pub centroids: CentroidSet,
    /// Noisy counts released in the final iteration, one per centroid.
    pub final_counts: Vec<f64>,
    pub ledger: BudgetLedger,
}

/// Runs exactly `schedule.iterations()` rounds of assign, noisy statistics and
/// noisy centroid update starting from `init`.
pub fn run_dp_lloyd<R: Rng + ?Sized>(
    ds: &Dataset,
    cfg: &VariantConfig,
    init: &CentroidSet,
    schedule: &BudgetSchedule,
    rng: &mut R,
) -> Result<LloydOutcome> {
    cfg.validate()?;
    if init.k_effective() != cfg.initial_count() {
        return Err(Error::invalid(
            "init",
            format!(
                "expected {} initial centroids, got {}",
                cfg.initial_count(),
                init.k_effective()
            ),
        ));
    }
    if init.dim() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            got: init.dim(),
        });
    }
    if schedule.iterations() != cfg.max_clustering {
        return Err(Error::invalid(
            "schedule",
            format!(
                "has {} shares for {} iterations",
                schedule.iterations(),
                cfg.max_clustering
            ),
        ));
    }
    let sensitivity = global_sensitivity(ds.dim(), ds.r())?;
    let mut ledger = BudgetLedger::new(schedule.total())?;
    let mut centroids = init.clone();
    let mut final_counts = Vec::new();
    for (i, &eps_iter) in schedule.shares().iter().enumerate() {
        let assignment = assign_points(ds, &centroids)?;
        let budget = IterationBudget {
            iteration: i + 1,
            epsilon: eps_iter,
            sensitivity,
        };
        let stats = noisy_stats(
            ds,
            &assignment,
            centroids.k_effective(),
            budget,
            cfg.noise,
            cfg.count_noise,
            &mut ledger,
            rng,
        )?;
        centroids = noisy_centroids(&stats, &centroids, ds.r())?;
        final_counts = stats.into_iter().map(|s| s.noisy_count).collect();
    }
    Ok(LloydOutcome {
        centroids,
        final_counts,
        ledger,
    })
}
