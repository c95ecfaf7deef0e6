//! Result export: CSV rows, JSON documents and per-figure plot series.

use std::io::Write;

use serde::Serialize;

use crate::engine::Variant;
use crate::error::{Error, Result};
use crate::harness::ExperimentCell;

pub const CSV_HEADER: &str = "variant,k,epsilon,n,mean_nicv,std_nicv,runs,seed";

/// One row per cell. Floats use the shortest representation that round-trips.
pub fn write_csv<W: Write>(cells: &[ExperimentCell], mut out: W) -> Result<()> {
    let io = |source| Error::Io {
        path: "<csv output>".into(),
        source,
    };
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.variant, c.k, c.epsilon, c.n, c.mean_nicv, c.std_nicv, c.runs, c.master_seed
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

#[derive(Serialize)]
struct JsonCell<'a> {
    variant: Variant,
    k: usize,
    epsilon: f64,
    n: usize,
    iterations: usize,
    schedule: &'a str,
    mean_nicv: f64,
    std_nicv: f64,
    runs: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    init_a_used: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    run_nicv: Option<&'a [f64]>,
}

/// JSON array of cells; `verbose` adds the per-run NICV arrays.
pub fn write_json<W: Write>(cells: &[ExperimentCell], verbose: bool, mut out: W) -> Result<()> {
    let doc: Vec<JsonCell> = cells
        .iter()
        .map(|c| JsonCell {
            variant: c.variant,
            k: c.k,
            epsilon: c.epsilon,
            n: c.n,
            iterations: c.iterations,
            schedule: c.schedule.as_str(),
            mean_nicv: c.mean_nicv,
            std_nicv: c.std_nicv,
            runs: c.runs,
            seed: c.master_seed,
            init_a_used: verbose.then_some(c.init_a_used.as_slice()),
            run_nicv: verbose.then_some(c.run_nicv.as_slice()),
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out).map_err(|source| Error::Io {
        path: "<json output>".into(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Epsilon,
    K,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotPoint {
    pub x: f64,
    pub mean_nicv: f64,
    pub std_nicv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub variant: Variant,
    pub points: Vec<PlotPoint>,
}

/// One NICV-versus-parameter chart: x is ε at fixed k, or k at fixed ε.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure {
    pub x_axis: Axis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub series: Vec<Series>,
}

fn distinct<T: PartialEq + Copy>(it: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for v in it {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Groups cells into figures. A sweep over ε yields one figure per k; a sweep
/// over k yields one figure per ε; a single point is reported on the ε axis.
pub fn plot_data(cells: &[ExperimentCell]) -> Vec<Figure> {
    let variants = distinct(cells.iter().map(|c| c.variant));
    let ks = distinct(cells.iter().map(|c| c.k));
    let epsilons = distinct(cells.iter().map(|c| c.epsilon.to_bits()));
    let series_for = |keep: &dyn Fn(&ExperimentCell) -> Option<f64>| -> Vec<Series> {
        variants
            .iter()
            .map(|&variant| Series {
                variant,
                points: cells
                    .iter()
                    .filter(|c| c.variant == variant)
                    .filter_map(|c| {
                        keep(c).map(|x| PlotPoint {
                            x,
                            mean_nicv: c.mean_nicv,
                            std_nicv: c.std_nicv,
                        })
                    })
                    .collect(),
            })
            .collect()
    };

    let mut figures = Vec::new();
    if epsilons.len() > 1 || ks.len() == 1 {
        for &k in &ks {
            figures.push(Figure {
                x_axis: Axis::Epsilon,
                k: Some(k),
                epsilon: None,
                series: series_for(&|c| (c.k == k).then_some(c.epsilon)),
            });
        }
    }
    if ks.len() > 1 {
        for &bits in &epsilons {
            let eps = f64::from_bits(bits);
            figures.push(Figure {
                x_axis: Axis::K,
                k: None,
                epsilon: Some(eps),
                series: series_for(&|c| (c.epsilon.to_bits() == bits).then_some(c.k as f64)),
            });
        }
    }
    figures
}

pub fn write_plot_data<W: Write>(cells: &[ExperimentCell], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &plot_data(cells))?;
    writeln!(out).map_err(|source| Error::Io {
        path: "<plot output>".into(),
        source,
    })
}
