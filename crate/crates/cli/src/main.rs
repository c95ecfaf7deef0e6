mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use dpkmeans_core::{load_dataset, report, run_grid};

use crate::config::{Args, OutputFormat, RunConfig};

const DATA_DIR_VAR: &str = "DPKMEANS_DATA_DIR";

fn run(cfg: &RunConfig) -> dpkmeans_core::Result<()> {
    let (ds, table) = load_dataset(&cfg.dataset, &cfg.columns, cfg.header, cfg.domain_r)?;
    eprint!("{}", cfg.describe(ds.dim(), ds.len(), table.dropped_rows));

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cfg.jobs {
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().expect("thread pool");
    let cells = pool.install(|| run_grid(&ds, &cfg.grid, &cfg.options))?;

    let sink: Box<dyn Write> = match &cfg.output {
        Some(path) => Box::new(
            File::create(path).map_err(|source| dpkmeans_core::Error::Io {
                path: path.clone(),
                source,
            })?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let out = BufWriter::new(sink);
    match cfg.format {
        OutputFormat::Csv => report::write_csv(&cells, out),
        OutputFormat::Json => report::write_json(&cells, cfg.verbose, out),
        OutputFormat::PlotData => report::write_plot_data(&cells, out),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let data_dir = std::env::var_os(DATA_DIR_VAR).map(Into::into);
    let cfg = match RunConfig::resolve(&args, data_dir) {
        Ok(cfg) => cfg,
        Err(errors) => {
            for e in &errors {
                eprintln!("error: {e}");
            }
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
