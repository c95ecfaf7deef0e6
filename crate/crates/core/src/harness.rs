//! Experiment protocol: repeated seeded pipelines per (variant, k, ε) cell.
//!
//! A cell draws `init_sets` independent initial centroid sets and runs the
//! private pipeline `runs_per_init` times on each, reporting the mean and
//! standard deviation of NICV over all runs. Every random stream is derived
//! from the master seed and the run's coordinates, so a cell's numbers do not
//! depend on which other cells are in the grid or on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run_dp_lloyd, CountNoise, NoiseMode, Variant, VariantConfig};
use crate::error::{Error, Result};
use crate::init::{select_initial_centroids, InitConfig, InitOutcome};
use crate::mechanism::{BudgetLedger, BudgetSchedule, SchedulePolicy};
use crate::merge::{merge_to_k, MergeState};
use crate::metrics::{nicv, NicvMode};
use crate::model::{CentroidSet, Dataset};

const INIT_STREAM: u64 = 0x696e_6974; // "init"
const RUN_STREAM: u64 = 0x0072_756e; // "run"

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes an ordered tuple of words into one 64-bit seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// Seed of the `init_index`-th initial centroid set.
///
/// Depends only on the initialization seed, `k` and the number of centroids,
/// so variants sharing a multiplier also share their initial centroids.
pub fn init_seed(init_seed: u64, k: usize, target_count: usize, init_index: usize) -> u64 {
    derive_seed(&[
        INIT_STREAM,
        init_seed,
        k as u64,
        target_count as u64,
        init_index as u64,
    ])
}

/// Seed of the noise stream for one run.
pub fn run_seed(
    master_seed: u64,
    variant: Variant,
    epsilon: f64,
    k: usize,
    init_index: usize,
    run_index: usize,
) -> u64 {
    derive_seed(&[
        RUN_STREAM,
        master_seed,
        variant.id(),
        epsilon.to_bits(),
        k as u64,
        init_index as u64,
        run_index as u64,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Protocol {
    pub init_sets: usize,
    pub runs_per_init: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            init_sets: 20,
            runs_per_init: 50,
        }
    }
}

impl Protocol {
    pub fn total_runs(&self) -> usize {
        self.init_sets * self.runs_per_init
    }
}

/// Settings shared by every cell of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnessOptions {
    /// Template for initialization; `target_count` is set per cell.
    pub init: InitConfig,
    pub protocol: Protocol,
    pub nicv: NicvMode,
    /// Seed for initial centroid sets; falls back to the master seed.
    pub init_seed: Option<u64>,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            init: InitConfig::new(1),
            protocol: Protocol::default(),
            nicv: NicvMode::Squared,
            init_seed: None,
        }
    }
}

/// Outcome of one full pipeline (initialization excluded).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub centroids: CentroidSet,
    pub nicv: f64,
    pub ledger: BudgetLedger,
}

/// Private Lloyd loop, merging back to `k` for the over-seeded variants, then
/// NICV of the released centroids.
pub fn run_pipeline(
    ds: &Dataset,
    cfg: &VariantConfig,
    init: &CentroidSet,
    schedule: &BudgetSchedule,
    mode: NicvMode,
    rng: &mut ChaCha8Rng,
) -> Result<RunOutcome> {
    let lloyd = run_dp_lloyd(ds, cfg, init, schedule, rng)?;
    let centroids = if cfg.variant.merges() {
        merge_to_k(
            MergeState::new(lloyd.centroids, &lloyd.final_counts)?,
            cfg.k,
        )?
    } else {
        lloyd.centroids
    };
    let nicv = nicv(ds, &centroids, mode)?;
    Ok(RunOutcome {
        centroids,
        nicv,
        ledger: lloyd.ledger,
    })
}

/// Aggregated statistics for one (variant, k, ε) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentCell {
    pub variant: Variant,
    pub k: usize,
    pub epsilon: f64,
    pub n: usize,
    pub iterations: usize,
    pub schedule: SchedulePolicy,
    pub mean_nicv: f64,
    pub std_nicv: f64,
    pub runs: usize,
    pub master_seed: u64,
    /// Separation parameter that each initial centroid set ended up using.
    pub init_a_used: Vec<f64>,
    /// Per-run NICV in (init index, run index) order.
    pub run_nicv: Vec<f64>,
}

impl ExperimentCell {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.std_nicv / (self.runs as f64).sqrt()
    }
}

/// Draws the `init_sets` initial centroid sets used by a cell.
pub fn initial_sets(
    ds: &Dataset,
    cfg: &VariantConfig,
    options: &HarnessOptions,
) -> Result<Vec<InitOutcome>> {
    let mut init_cfg = options.init.clone();
    init_cfg.target_count = cfg.initial_count();
    let base = options.init_seed.unwrap_or(cfg.seed);
    (0..options.protocol.init_sets)
        .into_par_iter()
        .map(|i| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(init_seed(base, cfg.k, init_cfg.target_count, i));
            select_initial_centroids(&init_cfg, ds.dim(), ds.r(), &mut rng)
        })
        .collect()
}

/// Runs the full protocol for one configuration; `cfg.seed` is the master seed.
pub fn run_cell(
    ds: &Dataset,
    cfg: &VariantConfig,
    options: &HarnessOptions,
) -> Result<ExperimentCell> {
    cfg.validate()?;
    let protocol = options.protocol;
    if protocol.total_runs() == 0 {
        return Err(Error::invalid(
            "protocol",
            "init_sets and runs_per_init must be at least 1",
        ));
    }
    let schedule = cfg.build_schedule()?;
    let inits = initial_sets(ds, cfg, options)?;
    let run_nicv = (0..protocol.total_runs())
        .into_par_iter()
        .map(|idx| {
            let (init_index, run_index) =
                (idx / protocol.runs_per_init, idx % protocol.runs_per_init);
            let seed = run_seed(
                cfg.seed,
                cfg.variant,
                cfg.epsilon,
                cfg.k,
                init_index,
                run_index,
            );
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_pipeline(
                ds,
                cfg,
                &inits[init_index].centroids,
                &schedule,
                options.nicv,
                &mut rng,
            )
            .map(|out| out.nicv)
        })
        .collect::<Result<Vec<f64>>>()?;

    let (mean_nicv, std_nicv) = mean_std(&run_nicv);
    Ok(ExperimentCell {
        variant: cfg.variant,
        k: cfg.k,
        epsilon: cfg.epsilon,
        n: cfg.n,
        iterations: cfg.max_clustering,
        schedule: cfg.schedule,
        mean_nicv,
        std_nicv,
        runs: run_nicv.len(),
        master_seed: cfg.seed,
        init_a_used: inits.iter().map(|o| o.a_used).collect(),
        run_nicv,
    })
}

/// Sample mean and (n − 1)-normalized standard deviation, summed in order.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Parameters of a grid sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub variants: Vec<Variant>,
    pub epsilons: Vec<f64>,
    pub ks: Vec<usize>,
    /// Multiplier for the merging variants.
    pub n: usize,
    pub iterations: usize,
    /// Forces one schedule policy on every variant.
    pub schedule_override: Option<SchedulePolicy>,
    pub noise: NoiseMode,
    pub count_noise: CountNoise,
    pub master_seed: u64,
}

impl GridSpec {
    pub fn new(
        variants: Vec<Variant>,
        epsilons: Vec<f64>,
        ks: Vec<usize>,
        master_seed: u64,
    ) -> Self {
        Self {
            variants,
            epsilons,
            ks,
            n: VariantConfig::DEFAULT_N,
            iterations: VariantConfig::DEFAULT_ITERATIONS,
            schedule_override: None,
            noise: NoiseMode::On,
            count_noise: CountNoise::Global,
            master_seed,
        }
    }

    /// Cell configurations in output order: variant, then k, then ε.
    pub fn configs(&self) -> Vec<VariantConfig> {
        let mut out = Vec::with_capacity(self.variants.len() * self.ks.len() * self.epsilons.len());
        for &variant in &self.variants {
            for &k in &self.ks {
                for &epsilon in &self.epsilons {
                    let mut cfg = VariantConfig::new(variant, k, epsilon)
                        .with_n(self.n)
                        .with_iterations(self.iterations)
                        .with_noise(self.noise)
                        .with_seed(self.master_seed);
                    cfg.count_noise = self.count_noise;
                    if let Some(policy) = self.schedule_override {
                        cfg.schedule = policy;
                    }
                    out.push(cfg);
                }
            }
        }
        out
    }
}

pub fn run_grid(
    ds: &Dataset,
    grid: &GridSpec,
    options: &HarnessOptions,
) -> Result<Vec<ExperimentCell>> {
    if grid.variants.is_empty() || grid.epsilons.is_empty() || grid.ks.is_empty() {
        return Err(Error::EmptyInput("grid"));
    }
    grid.configs()
        .iter()
        .map(|cfg| run_cell(ds, cfg, options))
        .collect()
}
