//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! The two ranking criteria need the Blood transfusion table at
//! `$DPKMEANS_DATA_DIR/blood.csv` or `<workspace>/data/blood.csv`
//! (see `scripts/prepare_data.py`). Without it they report FAIL.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dpkmeans_core::harness::initial_sets;
use dpkmeans_core::mechanism::laplace_cdf;
use dpkmeans_core::{
    build_schedule, global_sensitivity, laplace_sample, load_dataset, merge_pair, nicv, report,
    run_grid, run_pipeline, select_initial_centroids, CentroidSet, ColumnSelection, Dataset,
    ExperimentCell, GridSpec, HarnessOptions, HeaderPolicy, InitConfig, LaplaceScale, NicvMode,
    NoiseMode, Protocol, SchedulePolicy, Variant, VariantConfig,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

// 1
fn schedule_exactness() -> Check {
    let mut worst = 0.0f64;
    for eps in [0.2, 0.4, 0.6, 0.8, 1.0, 0.05, 3.7, 10.0] {
        let s = build_schedule(eps, 12, SchedulePolicy::Adaptive).map_err(|e| e.to_string())?;
        let want: Vec<f64> = (0..12)
            .map(|i| match i / 4 {
                0 => eps / 24.0,
                1 => eps / 12.0,
                _ => eps / 8.0,
            })
            .collect();
        ensure(s.shares().len() == 12, || {
            format!("eps={eps}: {} shares", s.shares().len())
        })?;
        for (i, (&g, &w)) in s.shares().iter().zip(&want).enumerate() {
            let e = rel_err(g, w);
            worst = worst.max(e);
            ensure(e <= 1e-12, || format!("eps={eps} share {i}: {g} vs {w}"))?;
        }
        let sum: f64 = s.shares().iter().sum();
        let e = rel_err(sum, eps);
        worst = worst.max(e);
        ensure(e <= 1e-12, || format!("eps={eps}: shares sum to {sum}"))?;
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

// 2
fn merge_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d65_7267);
    let mut worst = 0.0f64;
    for case in 0..10_000 {
        let dim = rng.random_range(1..=8);
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let wp = rng.random_range(1e-3..500.0);
        let wq = rng.random_range(1e-3..500.0);
        let (merged, w) = merge_pair(&p, &q, wp, wq).map_err(|e| e.to_string())?;
        ensure(w == wp + wq, || format!("case {case}: weight {w}"))?;
        for t in 0..dim {
            let want = (wp * p[t] + wq * q[t]) / (wp + wq);
            let e = (merged[t] - want).abs();
            worst = worst.max(e);
            ensure(e <= 1e-12, || {
                format!("case {case} dim {t}: {} vs {want}", merged[t])
            })?;
        }
    }
    Ok(format!("10000 cases, worst abs error {worst:.2e}"))
}

fn points_of(ds: &Dataset) -> Vec<Vec<f64>> {
    ds.points().map(<[f64]>::to_vec).collect()
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

// 3
fn noise_off_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f_6973);
    let mut worst = 0.0f64;
    for inst in 0..20 {
        let n = rng.random_range(50..=500);
        let dim = rng.random_range(1..=5);
        let k = rng.random_range(2..=5);
        let ds = common::gaussian_mixture(&mut rng, n, dim, k);
        let pts = points_of(&ds);
        let eps = rng.random_range(0.1..2.0);

        let init = select_initial_centroids(&InitConfig::new(k), dim, 1.0, &mut rng)
            .map_err(|e| e.to_string())?
            .centroids;
        let want = common::reference_lloyd(&pts, init.as_slice(), 12);
        for variant in Variant::ALL {
            let cfg = VariantConfig::new(variant, k, eps)
                .with_n(1)
                .with_noise(NoiseMode::Off);
            let schedule = cfg.build_schedule().map_err(|e| e.to_string())?;
            let out = run_pipeline(&ds, &cfg, &init, &schedule, NicvMode::Squared, &mut rng)
                .map_err(|e| e.to_string())?;
            let diff = max_abs_diff(out.centroids.as_slice(), &want);
            worst = worst.max(diff);
            ensure(diff <= 1e-9, || {
                format!("instance {inst} {variant}: max diff {diff:.3e}")
            })?;
        }

        let wide = select_initial_centroids(&InitConfig::new(3 * k), dim, 1.0, &mut rng)
            .map_err(|e| e.to_string())?
            .centroids;
        let mut released = Vec::new();
        for variant in [Variant::AverageNk, Variant::AllocationNk] {
            let cfg = VariantConfig::new(variant, k, eps).with_noise(NoiseMode::Off);
            let schedule = cfg.build_schedule().map_err(|e| e.to_string())?;
            let mut run_rng = ChaCha8Rng::seed_from_u64(inst);
            let out = run_pipeline(&ds, &cfg, &wide, &schedule, NicvMode::Squared, &mut run_rng)
                .map_err(|e| e.to_string())?;
            released.push(out.centroids);
        }
        ensure(released[0] == released[1], || {
            format!("instance {inst}: average_nk and allocation_nk differ")
        })?;
    }
    Ok(format!("20 instances, worst centroid diff {worst:.2e}"))
}

// 4
fn sampler_statistics() -> Check {
    let scale = LaplaceScale::new(1.0).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c61_706c);
    let draws: Vec<f64> = (0..1_000_000)
        .map(|_| laplace_sample(scale, &mut rng))
        .collect();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let ks = common::ks_statistic(draws, |x| common::laplace_cdf_reference(1.0, x));
    ensure(mean.abs() < 0.01, || format!("mean {mean}"))?;
    ensure((var - 2.0).abs() < 0.05, || format!("variance {var}"))?;
    ensure(ks < 0.01, || format!("KS {ks}"))?;
    // the library CDF agrees with the reference one
    for x in [-5.0, -1.0, -1e-3, 0.0, 0.3, 2.0, 7.5] {
        let e = (laplace_cdf(scale, x) - common::laplace_cdf_reference(1.0, x)).abs();
        ensure(e < 1e-15, || format!("cdf at {x} off by {e}"))?;
    }
    Ok(format!("mean {mean:.5}, variance {var:.5}, KS {ks:.5}"))
}

// 5
fn ledger_accounting() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c65_6467);
    let mut runs = 0;
    for _ in 0..10 {
        let dim = rng.random_range(1..=6);
        let r = rng.random_range(0.5..3.0);
        let raw = common::uniform_points(&mut rng, 300, dim, 1.0);
        let ds = dpkmeans_core::normalize("u", &raw, r).map_err(|e| e.to_string())?;
        let k = rng.random_range(1..=5);
        let eps = rng.random_range(0.05..5.0);
        let iters = 3 * rng.random_range(1..=6);
        for variant in Variant::ALL {
            let cfg = VariantConfig::new(variant, k, eps)
                .with_n(rng.random_range(2..=4))
                .with_iterations(iters);
            let schedule = cfg.build_schedule().map_err(|e| e.to_string())?;
            let init =
                select_initial_centroids(&InitConfig::new(cfg.initial_count()), dim, r, &mut rng)
                    .map_err(|e| e.to_string())?
                    .centroids;
            let out = run_pipeline(&ds, &cfg, &init, &schedule, NicvMode::Squared, &mut rng)
                .map_err(|e| e.to_string())?;
            let ledger = &out.ledger;
            ensure(rel_err(ledger.consumed(), eps) <= 1e-12, || {
                format!("{variant}: consumed {} of {eps}", ledger.consumed())
            })?;
            ensure(ledger.entries().len() == iters, || {
                format!("{variant}: entry count")
            })?;
            for (entry, &share) in ledger.entries().iter().zip(schedule.shares()) {
                let want = (dim as f64 * r + 1.0) / share;
                ensure(entry.scale == want, || {
                    format!(
                        "{variant} iteration {}: scale {} vs {want}",
                        entry.iteration, entry.scale
                    )
                })?;
            }
            let draws = iters * cfg.n * k * (dim + 1);
            ensure(ledger.total_draws() == draws, || {
                format!(
                    "{variant}: {} draws, expected {draws}",
                    ledger.total_draws()
                )
            })?;
            ensure(
                global_sensitivity(dim, r).ok() == Some(dim as f64 * r + 1.0),
                || "sensitivity".into(),
            )?;
            runs += 1;
        }
    }
    Ok(format!("{runs} runs checked"))
}

fn blood_path() -> PathBuf {
    match std::env::var_os("DPKMEANS_DATA_DIR") {
        Some(dir) => PathBuf::from(dir).join("blood.csv"),
        None => Path::new(env!("CARGO_MANIFEST_DIR"))
            .ancestors()
            .nth(2)
            .expect("workspace root")
            .join("data/blood.csv"),
    }
}

fn blood_grid() -> Result<Vec<ExperimentCell>, String> {
    let path = blood_path();
    if !path.exists() {
        return Err(format!(
            "dataset not found at {} (run scripts/prepare_data.py)",
            path.display()
        ));
    }
    let (ds, _) = load_dataset(&path, &ColumnSelection::All, HeaderPolicy::Present, 1.0)
        .map_err(|e| e.to_string())?;
    ensure(ds.len() == 748 && ds.dim() == 5, || {
        format!("expected 748x5, loaded {}x{}", ds.len(), ds.dim())
    })?;
    let grid = GridSpec::new(
        Variant::ALL.to_vec(),
        vec![0.2, 0.4, 0.6, 0.8, 1.0],
        vec![4],
        0,
    );
    run_grid(&ds, &grid, &HarnessOptions::default()).map_err(|e| e.to_string())
}

fn pooled_se(a: &ExperimentCell, b: &ExperimentCell) -> f64 {
    a.std_error().hypot(b.std_error())
}

// 6
fn blood_ranking(cells: &Result<Vec<ExperimentCell>, String>) -> Check {
    let cells = cells.as_ref().map_err(Clone::clone)?;
    let at = |v: Variant| {
        cells
            .iter()
            .find(|c| c.variant == v && c.epsilon == 0.6)
            .expect("grid cell")
    };
    let order = [
        Variant::AllocationNk,
        Variant::AverageNk,
        Variant::AverageK,
        Variant::AllocationK,
    ];
    let means: Vec<String> = order
        .iter()
        .map(|&v| format!("{v}={:.4}", at(v).mean_nicv))
        .collect();
    let summary = means.join(" ");
    for pair in order.windows(2) {
        ensure(at(pair[0]).mean_nicv < at(pair[1]).mean_nicv, || {
            format!("{} !< {}: {summary}", pair[0], pair[1])
        })?;
    }
    let (best, base) = (at(Variant::AllocationNk), at(Variant::AverageK));
    let gap = (base.mean_nicv - best.mean_nicv) / pooled_se(best, base);
    ensure(gap > 2.0, || format!("gap {gap:.2} pooled SE: {summary}"))?;
    Ok(format!("{summary}, gap {gap:.2} pooled SE"))
}

// 7
fn blood_monotonicity(cells: &Result<Vec<ExperimentCell>, String>) -> Check {
    let cells = cells.as_ref().map_err(Clone::clone)?;
    let mut notes = Vec::new();
    for variant in Variant::ALL {
        let row: Vec<&ExperimentCell> = cells.iter().filter(|c| c.variant == variant).collect();
        let violations: Vec<(f64, f64)> = row
            .windows(2)
            .filter(|w| w[1].mean_nicv > w[0].mean_nicv)
            .map(|w| {
                (
                    (w[1].mean_nicv - w[0].mean_nicv) / pooled_se(w[0], w[1]),
                    w[1].epsilon,
                )
            })
            .collect();
        let ok = match violations.as_slice() {
            [] => true,
            [(size, _)] => *size <= 1.0,
            _ => false,
        };
        let trace: Vec<String> = row.iter().map(|c| format!("{:.4}", c.mean_nicv)).collect();
        ensure(ok, || {
            format!(
                "{variant}: [{}] violations {violations:?}",
                trace.join(", ")
            )
        })?;
        notes.push(format!("{variant}:{}", violations.len()));
    }
    Ok(format!("violations per variant {}", notes.join(" ")))
}

// 8
fn nicv_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e69_6376);
    let mut worst = 0.0f64;
    for inst in 0..100 {
        let n = rng.random_range(1..=1000);
        let dim = rng.random_range(1..=6);
        let k = rng.random_range(1..=8);
        let r = rng.random_range(0.5..4.0);
        let pts = common::uniform_points(&mut rng, n, dim, r);
        let ds = Dataset::new("u", pts.clone(), r).map_err(|e| e.to_string())?;
        let mut cs = common::uniform_points(&mut rng, k, dim, r);
        let got = nicv(
            &ds,
            &CentroidSet::new(cs.clone()).unwrap(),
            NicvMode::Squared,
        )
        .map_err(|e| e.to_string())?;
        let want = common::brute_nicv(&pts, &cs);
        let e = (got - want).abs();
        worst = worst.max(e);
        ensure(e <= 1e-12, || format!("instance {inst}: {got} vs {want}"))?;

        cs.extend(common::uniform_points(&mut rng, 1, dim, r));
        let more = nicv(&ds, &CentroidSet::new(cs).unwrap(), NicvMode::Squared)
            .map_err(|e| e.to_string())?;
        ensure(more <= got, || {
            format!("instance {inst}: extra centroid raised NICV {got} -> {more}")
        })?;
    }
    Ok(format!("100 instances, worst abs error {worst:.2e}"))
}

// 9
fn init_constraints() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x696e_6974);
    for case in 0..1000 {
        let dim = rng.random_range(1..=6);
        let r = rng.random_range(0.5..3.0);
        let variant = Variant::ALL[rng.random_range(0..4)];
        let k = rng.random_range(1..=5);
        let cfg = VariantConfig::new(variant, k, 1.0)
            .with_n(rng.random_range(2..=3))
            .with_seed(rng.random());
        let mut init = InitConfig::new(1);
        init.a = r * rng.random_range(0.05..0.9);
        init.shrink_factor = rng.random_range(0.3..0.8);
        init.max_attempts_per_centroid = rng.random_range(20..=150);
        init.a_floor = 1e-6;
        let options = HarnessOptions {
            init,
            protocol: Protocol {
                init_sets: 3,
                runs_per_init: 1,
            },
            ..HarnessOptions::default()
        };

        let first = Dataset::new("a", common::uniform_points(&mut rng, 40, dim, r), r).unwrap();
        let second = Dataset::new("b", common::uniform_points(&mut rng, 70, dim, r), r).unwrap();
        let sets = initial_sets(&first, &cfg, &options).map_err(|e| format!("case {case}: {e}"))?;
        let again =
            initial_sets(&second, &cfg, &options).map_err(|e| format!("case {case}: {e}"))?;
        ensure(sets.len() == again.len(), || {
            format!("case {case}: set counts differ")
        })?;
        for (a, b) in sets.iter().zip(&again) {
            let bits = |o: &dpkmeans_core::InitOutcome| -> Vec<u64> {
                o.centroids.iter().flatten().map(|v| v.to_bits()).collect()
            };
            ensure(
                bits(a) == bits(b) && a.a_used.to_bits() == b.a_used.to_bits(),
                || format!("case {case}: initial centroids depend on the data"),
            )?;
        }
        for out in &sets {
            let a = out.a_used;
            let cs = out.centroids.as_slice();
            ensure(cs.len() == cfg.initial_count(), || {
                format!("case {case}: {} centroids", cs.len())
            })?;
            ensure(a <= options.init.a && a >= options.init.a_floor, || {
                format!("case {case}: a_used {a}")
            })?;
            for c in cs {
                ensure(c.iter().all(|&v| v.abs() <= r - a), || {
                    format!("case {case}: {c:?} outside inner box r-a={}", r - a)
                })?;
            }
            for i in 0..cs.len() {
                for j in i + 1..cs.len() {
                    let d: f64 = cs[i]
                        .iter()
                        .zip(&cs[j])
                        .map(|(u, v)| (u - v) * (u - v))
                        .sum::<f64>()
                        .sqrt();
                    ensure(d >= 2.0 * a, || {
                        format!("case {case}: pair ({i},{j}) at {d} < 2a={}", 2.0 * a)
                    })?;
                }
            }
        }
    }
    Ok("1000 configurations".into())
}

// 10
fn reproducibility() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7265_7072);
    let ds = common::gaussian_mixture(&mut rng, 400, 3, 4);
    let mut grid = GridSpec::new(Variant::ALL.to_vec(), vec![0.2, 0.6, 1.0], vec![2, 4], 42);
    grid.n = 3;
    let options = HarnessOptions {
        protocol: Protocol {
            init_sets: 5,
            runs_per_init: 10,
        },
        ..HarnessOptions::default()
    };
    let render = |threads: usize| -> Result<Vec<u8>, String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        let cells = pool
            .install(|| run_grid(&ds, &grid, &options))
            .map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        report::write_csv(&cells, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let first = render(1)?;
    let second = render(1)?;
    let parallel = render(4)?;
    ensure(first == second, || "rerun produced different bytes".into())?;
    ensure(first == parallel, || {
        "thread count changed the output".into()
    })?;

    let mut other = grid.clone();
    other.master_seed = 43;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .unwrap();
    let cells = pool
        .install(|| run_grid(&ds, &other, &options))
        .map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    report::write_csv(&cells, &mut buf).map_err(|e| e.to_string())?;
    ensure(buf != first, || {
        "a different master seed gave identical output".into()
    })?;
    Ok(format!(
        "{} byte CSV identical across reruns and thread counts",
        first.len()
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report_line = |id: u32, name: &str, started: Instant, outcome: Check| {
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{id:>2}] {name} ({detail}) [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{id:>2}] {name}: {detail} [{secs:.1}s]");
            }
        }
    };

    let t = Instant::now();
    report_line(1, "adaptive schedule shares", t, schedule_exactness());
    let t = Instant::now();
    report_line(2, "weighted merge oracle", t, merge_oracle());
    let t = Instant::now();
    report_line(
        3,
        "noise-off equivalence with plain Lloyd",
        t,
        noise_off_equivalence(),
    );
    let t = Instant::now();
    report_line(4, "Laplace sampler statistics", t, sampler_statistics());
    let t = Instant::now();
    report_line(5, "budget ledger accounting", t, ledger_accounting());
    let t = Instant::now();
    let blood = blood_grid();
    report_line(
        6,
        "variant ranking on Blood at eps=0.6",
        t,
        blood_ranking(&blood),
    );
    let t = Instant::now();
    report_line(
        7,
        "NICV non-increasing in eps on Blood",
        t,
        blood_monotonicity(&blood),
    );
    let t = Instant::now();
    report_line(8, "NICV brute-force oracle", t, nicv_oracle());
    let t = Instant::now();
    report_line(9, "initialization constraints", t, init_constraints());
    let t = Instant::now();
    report_line(10, "byte-identical reruns", t, reproducibility());

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
