use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Parser;
use dpkmeans_core::{
    ColumnSelection, CountNoise, GridSpec, HarnessOptions, HeaderPolicy, InitConfig, NicvMode,
    NoiseMode, Protocol, SchedulePolicy, Variant,
};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "dpkmeans",
    version,
    about = "Benchmark differentially private k-means variants on a numeric CSV dataset"
)]
pub struct Args {
    /// Headered, comma-separated numeric CSV. Relative paths that do not exist
    /// are looked up under $DPKMEANS_DATA_DIR.
    #[arg(long)]
    pub dataset: PathBuf,

    /// Comma-separated column names or zero-based indices (default: all).
    #[arg(long)]
    pub columns: Option<String>,

    /// Treat the first CSV line as data.
    #[arg(long)]
    pub no_header: bool,

    #[arg(long)]
    pub k: Option<usize>,

    /// Inclusive range `A:B` or comma list.
    #[arg(long)]
    pub k_grid: Option<String>,

    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,

    /// `A:B:STEP` (inclusive) or comma list.
    #[arg(long)]
    pub epsilon_grid: Option<String>,

    /// average_k | allocation_k | average_nk | allocation_nk | all
    #[arg(long, default_value = "allocation_nk")]
    pub variant: String,

    /// Over-seeding multiplier for the merging variants.
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    #[arg(long, default_value_t = 12)]
    pub iters: usize,

    /// Force one budget schedule (uniform | adaptive) on every variant.
    #[arg(long)]
    pub schedule: Option<String>,

    #[arg(long, default_value_t = 0.5)]
    pub init_a: f64,

    #[arg(long, default_value_t = 0.5)]
    pub init_shrink: f64,

    #[arg(long, default_value_t = 100)]
    pub init_attempts: usize,

    #[arg(long, default_value_t = 1e-4)]
    pub init_floor: f64,

    /// Seed for the initial centroid sets (default: --seed).
    #[arg(long)]
    pub init_seed: Option<u64>,

    #[arg(long, default_value_t = 20)]
    pub init_sets: usize,

    #[arg(long, default_value_t = 50)]
    pub runs_per_init: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// squared | literal
    #[arg(long, default_value = "squared")]
    pub nicv: String,

    /// on | off
    #[arg(long, default_value = "on")]
    pub noise: String,

    /// Sensitivity of the noisy count: global (d·r + 1) | unit (1)
    #[arg(long, default_value = "global")]
    pub count_noise: String,

    /// Domain half-width used for normalization and sensitivity.
    #[arg(long, default_value_t = 1.0)]
    pub domain_r: f64,

    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Output file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// csv | json | plotdata
    #[arg(long, default_value = "csv")]
    pub format: String,

    /// Include per-run NICV arrays in JSON output.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    PlotData,
}

impl OutputFormat {
    fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::PlotData => "plotdata",
        }
    }
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub columns: ColumnSelection,
    pub header: HeaderPolicy,
    pub domain_r: f64,
    pub grid: GridSpec,
    pub options: HarnessOptions,
    pub jobs: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub verbose: bool,
}

fn parse_f64_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number"))
    };
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step.is_nan() || step <= 0.0 || b < a {
                return Err(format!("need A <= B and STEP > 0 in `{spec}`"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            // round away accumulated binary error so 0.2:1.0:0.2 yields 0.6, not 0.6000000000000001
            Ok((0..count)
                .map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [single] => single.split(',').map(|s| num(s.trim())).collect(),
        _ => Err(format!("expected A:B:STEP or a comma list, got `{spec}`")),
    }
}

fn parse_k_grid(spec: &str) -> Result<Vec<usize>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{s}` is not a non-negative integer"))
    };
    match spec.split_once(':') {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if b < a {
                return Err(format!("empty range `{spec}`"));
            }
            Ok((a..=b).collect())
        }
        None => spec.split(',').map(num).collect(),
    }
}

fn fmt_list<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Validates every flag, reporting all violations at once.
    pub fn resolve(args: &Args, data_dir: Option<PathBuf>) -> Result<Self, Vec<String>> {
        let mut errors = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                errors.push(msg);
            }
        };

        let ks = match (&args.k, &args.k_grid) {
            (Some(k), None) => Ok(vec![*k]),
            (None, Some(g)) => parse_k_grid(g).map_err(|e| format!("--k-grid: {e}")),
            (Some(_), Some(_)) => Err("--k and --k-grid are mutually exclusive".to_string()),
            (None, None) => Err("one of --k or --k-grid is required".to_string()),
        };
        let epsilons = match (&args.epsilon, &args.epsilon_grid) {
            (Some(e), None) => Ok(vec![*e]),
            (None, Some(g)) => parse_f64_grid(g).map_err(|e| format!("--epsilon-grid: {e}")),
            (Some(_), Some(_)) => {
                Err("--epsilon and --epsilon-grid are mutually exclusive".to_string())
            }
            (None, None) => Err("one of --epsilon or --epsilon-grid is required".to_string()),
        };
        let variants = if args.variant == "all" {
            Ok(Variant::ALL.to_vec())
        } else {
            args.variant
                .split(',')
                .map(|v| v.trim().parse::<Variant>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("--variant: {e}"))
        };
        let schedule = args
            .schedule
            .as_deref()
            .map(str::parse::<SchedulePolicy>)
            .transpose()
            .map_err(|e| format!("--schedule: {e}"));
        let nicv = args
            .nicv
            .parse::<NicvMode>()
            .map_err(|e| format!("--nicv: {e}"));
        let noise = match args.noise.as_str() {
            "on" => Ok(NoiseMode::On),
            "off" => Ok(NoiseMode::Off),
            other => Err(format!("--noise: expected on|off, got `{other}`")),
        };
        let count_noise = match args.count_noise.as_str() {
            "global" => Ok(CountNoise::Global),
            "unit" => Ok(CountNoise::Unit),
            other => Err(format!(
                "--count-noise: expected global|unit, got `{other}`"
            )),
        };
        let format = match args.format.as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "plotdata" => Ok(OutputFormat::PlotData),
            other => Err(format!(
                "--format: expected csv|json|plotdata, got `{other}`"
            )),
        };

        if let Ok(ks) = &ks {
            check(!ks.is_empty(), "k grid is empty".into());
            check(
                ks.iter().all(|&k| k >= 1),
                "every k must be at least 1".into(),
            );
        }
        if let Ok(eps) = &epsilons {
            check(!eps.is_empty(), "epsilon grid is empty".into());
            check(
                eps.iter().all(|e| *e > 0.0 && e.is_finite()),
                format!(
                    "every epsilon must be positive and finite, got [{}]",
                    fmt_list(eps)
                ),
            );
        }
        check(args.n >= 1, "--n must be at least 1".into());
        check(args.iters >= 1, "--iters must be at least 1".into());
        let adaptive_used = match (&schedule, &variants) {
            (Ok(Some(p)), _) => *p == SchedulePolicy::Adaptive,
            (Ok(None), Ok(vs)) => vs.iter().any(|v| v.policy() == SchedulePolicy::Adaptive),
            _ => false,
        };
        check(
            !adaptive_used || args.iters.is_multiple_of(3),
            format!(
                "--iters must be a multiple of 3 for the adaptive schedule, got {}",
                args.iters
            ),
        );
        check(
            args.init_a > 0.0 && args.init_a.is_finite(),
            format!("--init-a must be positive, got {}", args.init_a),
        );
        check(
            args.init_shrink > 0.0 && args.init_shrink < 1.0,
            format!("--init-shrink must lie in (0, 1), got {}", args.init_shrink),
        );
        check(
            args.init_attempts >= 1,
            "--init-attempts must be at least 1".into(),
        );
        check(
            args.init_floor > 0.0 && args.init_floor <= args.init_a,
            format!(
                "--init-floor must lie in (0, init-a], got {}",
                args.init_floor
            ),
        );
        check(args.init_sets >= 1, "--init-sets must be at least 1".into());
        check(
            args.runs_per_init >= 1,
            "--runs-per-init must be at least 1".into(),
        );
        check(
            args.domain_r > 0.0 && args.domain_r.is_finite(),
            format!("--domain-r must be positive, got {}", args.domain_r),
        );
        check(args.jobs != Some(0), "--jobs must be at least 1".into());

        fn take<T>(r: Result<T, String>, errors: &mut Vec<String>) -> Option<T> {
            r.map_err(|e| errors.push(e)).ok()
        }
        let ks = take(ks, &mut errors);
        let epsilons = take(epsilons, &mut errors);
        let variants = take(variants, &mut errors);
        let schedule = take(schedule, &mut errors);
        let nicv = take(nicv, &mut errors);
        let noise = take(noise, &mut errors);
        let count_noise = take(count_noise, &mut errors);
        let format = take(format, &mut errors);
        let (
            Some(ks),
            Some(epsilons),
            Some(variants),
            Some(schedule),
            Some(nicv),
            Some(noise),
            Some(count_noise),
            Some(format),
        ) = (
            ks,
            epsilons,
            variants,
            schedule,
            nicv,
            noise,
            count_noise,
            format,
        )
        else {
            return Err(errors);
        };
        if !errors.is_empty() {
            return Err(errors);
        }

        let mut grid = GridSpec::new(variants, epsilons, ks, args.seed);
        grid.n = args.n;
        grid.iterations = args.iters;
        grid.schedule_override = schedule;
        grid.noise = noise;
        grid.count_noise = count_noise;

        let mut init = InitConfig::new(1);
        init.a = args.init_a;
        init.shrink_factor = args.init_shrink;
        init.max_attempts_per_centroid = args.init_attempts;
        init.a_floor = args.init_floor;

        Ok(RunConfig {
            dataset: dpkmeans_core::ingest::resolve_data_path(&args.dataset, data_dir.as_deref()),
            columns: args
                .columns
                .as_deref()
                .map(ColumnSelection::parse_list)
                .unwrap_or_default(),
            header: if args.no_header {
                HeaderPolicy::Absent
            } else {
                HeaderPolicy::Present
            },
            domain_r: args.domain_r,
            grid,
            options: HarnessOptions {
                init,
                protocol: Protocol {
                    init_sets: args.init_sets,
                    runs_per_init: args.runs_per_init,
                },
                nicv,
                init_seed: args.init_seed,
            },
            jobs: args.jobs,
            output: args.output.clone(),
            format,
            verbose: args.verbose,
        })
    }

    /// A command line that reproduces this configuration exactly.
    pub fn rerun_args(&self) -> Vec<String> {
        let g = &self.grid;
        let o = &self.options;
        let mut a = vec!["--dataset".to_string(), self.dataset.display().to_string()];
        if let ColumnSelection::Columns(cols) = &self.columns {
            a.extend(["--columns".into(), cols.join(",")]);
        }
        if self.header == HeaderPolicy::Absent {
            a.push("--no-header".into());
        }
        a.extend(["--k-grid".into(), fmt_list(&g.ks)]);
        a.extend(["--epsilon-grid".into(), fmt_list(&g.epsilons)]);
        a.extend(["--variant".into(), fmt_list(&g.variants)]);
        a.extend(["--n".into(), g.n.to_string()]);
        a.extend(["--iters".into(), g.iterations.to_string()]);
        if let Some(p) = g.schedule_override {
            a.extend(["--schedule".into(), p.to_string()]);
        }
        a.extend(["--init-a".into(), o.init.a.to_string()]);
        a.extend(["--init-shrink".into(), o.init.shrink_factor.to_string()]);
        a.extend([
            "--init-attempts".into(),
            o.init.max_attempts_per_centroid.to_string(),
        ]);
        a.extend(["--init-floor".into(), o.init.a_floor.to_string()]);
        if let Some(s) = o.init_seed {
            a.extend(["--init-seed".into(), s.to_string()]);
        }
        a.extend(["--init-sets".into(), o.protocol.init_sets.to_string()]);
        a.extend([
            "--runs-per-init".into(),
            o.protocol.runs_per_init.to_string(),
        ]);
        a.extend(["--seed".into(), g.master_seed.to_string()]);
        a.extend(["--nicv".into(), o.nicv.to_string()]);
        let noise = match g.noise {
            NoiseMode::On => "on",
            NoiseMode::Off => "off",
        };
        a.extend(["--noise".into(), noise.into()]);
        let count = match g.count_noise {
            CountNoise::Global => "global",
            CountNoise::Unit => "unit",
        };
        a.extend(["--count-noise".into(), count.into()]);
        a.extend(["--domain-r".into(), self.domain_r.to_string()]);
        a.extend(["--format".into(), self.format.as_str().into()]);
        if self.verbose {
            a.push("--verbose".into());
        }
        a
    }

    /// Human-readable summary including the derived schedules and sensitivity.
    pub fn describe(&self, dim: usize, rows: usize, dropped: usize) -> String {
        let g = &self.grid;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# dataset {} : {rows} rows x {dim} dims ({dropped} dropped), r = {}",
            self.dataset.display(),
            self.domain_r
        );
        match dpkmeans_core::global_sensitivity(dim, self.domain_r) {
            Ok(delta) => {
                let _ = writeln!(s, "# sensitivity d*r + 1 = {delta}");
            }
            Err(e) => {
                let _ = writeln!(s, "# sensitivity unavailable: {e}");
            }
        }
        let _ = writeln!(
            s,
            "# protocol {} init sets x {} runs, nicv {}, noise {:?}, count noise {:?}",
            self.options.protocol.init_sets,
            self.options.protocol.runs_per_init,
            self.options.nicv,
            g.noise,
            g.count_noise
        );
        let mut seen = Vec::new();
        for cfg in g.configs() {
            let key = (cfg.schedule, cfg.epsilon.to_bits());
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            if let Ok(schedule) = cfg.build_schedule() {
                let _ = writeln!(
                    s,
                    "# schedule {} eps={}: [{}]",
                    cfg.schedule,
                    cfg.epsilon,
                    fmt_list(schedule.shares())
                );
            }
        }
        let _ = writeln!(s, "# rerun: dpkmeans {}", self.rerun_args().join(" "));
        s
    }
}
