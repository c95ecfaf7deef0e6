//! Differentially private k-means clustering with adaptive budget allocation
//! and noisy-cluster merging, plus the experiment harness used to compare it
//! against its baselines.
//!
//! The pipeline for one run:
//!
//! 1. [`init::select_initial_centroids`] picks `k` (or `n·k`) well-separated
//!    centroids without looking at the data.
//! 2. [`engine::run_dp_lloyd`] runs a fixed number of Lloyd iterations, each
//!    releasing Laplace-noised cluster sums and counts under a
//!    [`mechanism::BudgetSchedule`].
//! 3. For the over-seeded variants, [`merge::merge_to_k`] folds the `n·k`
//!    noisy clusters back down to `k` using their noisy counts as weights.
//! 4. [`metrics::nicv`] scores the released centroids.
//!
//! [`harness`] repeats this across seeds and parameter grids; [`report`]
//! writes the results.

pub mod engine;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod init;
pub mod mechanism;
pub mod merge;
pub mod metrics;
pub mod model;
pub mod report;

pub use engine::{
    noisy_centroids, noisy_stats, run_dp_lloyd, CountNoise, IterationBudget, LloydOutcome,
    NoiseMode, NoisyClusterStat, Variant, VariantConfig,
};
pub use error::{Error, Result};
pub use harness::{
    run_cell, run_grid, run_pipeline, ExperimentCell, GridSpec, HarnessOptions, Protocol,
    RunOutcome,
};
pub use ingest::{load_csv, load_dataset, ColumnSelection, HeaderPolicy, RawTable};
pub use init::{select_initial_centroids, InitConfig, InitOutcome};
pub use mechanism::{
    build_schedule, global_sensitivity, laplace_sample, BudgetLedger, BudgetSchedule, LaplaceScale,
    LedgerEntry, SchedulePolicy,
};
pub use merge::{merge_pair, merge_to_k, MergeState};
pub use metrics::{nicv, NicvMode};
pub use model::{
    assign_points, distance, normalize, true_centroid_update, Assignment, CentroidSet, Dataset,
};
