//! Numeric CSV loading.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{normalize, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderPolicy {
    #[default]
    Present,
    Absent,
}

/// Which columns to keep. Each entry names a header field, or failing that a
/// zero-based column index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ColumnSelection {
    #[default]
    All,
    Columns(Vec<String>),
}

impl ColumnSelection {
    /// Parses a comma-separated list; an empty string selects everything.
    pub fn parse_list(list: &str) -> Self {
        let cols: Vec<String> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        if cols.is_empty() {
            ColumnSelection::All
        } else {
            ColumnSelection::Columns(cols)
        }
    }
}

/// A rectangular table of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Rows skipped because a selected field was missing or not a finite number.
    pub dropped_rows: usize,
}

/// Resolves a relative dataset path against a data directory when it does not
/// exist as given.
pub fn resolve_data_path(path: &Path, data_dir: Option<&Path>) -> PathBuf {
    match data_dir {
        Some(dir) if path.is_relative() && !path.exists() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

pub fn load_csv(path: &Path, columns: &ColumnSelection, header: HeaderPolicy) -> Result<RawTable> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    parse_csv(&bytes, path, columns, header)
}

/// Parses CSV bytes; `origin` is only used in error messages.
pub fn parse_csv(
    bytes: &[u8],
    origin: &Path,
    columns: &ColumnSelection,
    header: HeaderPolicy,
) -> Result<RawTable> {
    let csv_err = |source| Error::Csv {
        path: origin.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header == HeaderPolicy::Present)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let header_names: Vec<String> = match header {
        HeaderPolicy::Present => reader
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(String::from)
            .collect(),
        HeaderPolicy::Absent => Vec::new(),
    };

    let mut records = Vec::new();
    let mut dropped_rows = 0;
    for record in reader.records() {
        match record {
            Ok(r) => records.push(r),
            Err(e) if e.is_io_error() => return Err(csv_err(e)),
            Err(_) => dropped_rows += 1,
        }
    }

    let width = if header_names.is_empty() {
        records.iter().map(|r| r.len()).max().unwrap_or(0)
    } else {
        header_names.len()
    };
    let name_of = |i: usize| {
        header_names
            .get(i)
            .cloned()
            .unwrap_or_else(|| format!("column{i}"))
    };

    let selected: Vec<usize> = match columns {
        ColumnSelection::All => (0..width).collect(),
        ColumnSelection::Columns(cols) => cols
            .iter()
            .map(|c| {
                header_names
                    .iter()
                    .position(|h| h == c)
                    .or_else(|| c.parse::<usize>().ok().filter(|&i| i < width))
                    .ok_or_else(|| Error::UnknownColumn {
                        path: origin.to_path_buf(),
                        column: c.clone(),
                    })
            })
            .collect::<Result<_>>()?,
    };
    if selected.is_empty() {
        return Err(Error::EmptyInput("column selection"));
    }

    let mut numeric_hits = vec![0usize; selected.len()];
    let mut rows = Vec::with_capacity(records.len());
    for record in &records {
        let mut row = Vec::with_capacity(selected.len());
        for (slot, &col) in selected.iter().enumerate() {
            if let Some(v) = record
                .get(col)
                .and_then(|f| f.parse::<f64>().ok())
                .filter(|v| v.is_finite())
            {
                numeric_hits[slot] += 1;
                row.push(v);
            }
        }
        if row.len() == selected.len() {
            rows.push(row);
        } else {
            dropped_rows += 1;
        }
    }

    if let Some(slot) = numeric_hits.iter().position(|&hits| hits == 0) {
        if !records.is_empty() {
            return Err(Error::NonNumericColumn {
                path: origin.to_path_buf(),
                column: name_of(selected[slot]),
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::NoUsableRows {
            path: origin.to_path_buf(),
            dropped: dropped_rows,
        });
    }
    Ok(RawTable {
        column_names: selected.iter().map(|&i| name_of(i)).collect(),
        rows,
        dropped_rows,
    })
}

/// Loads a CSV and min-max normalizes it onto `[-r, r]`.
pub fn load_dataset(
    path: &Path,
    columns: &ColumnSelection,
    header: HeaderPolicy,
    r: f64,
) -> Result<(Dataset, RawTable)> {
    let table = load_csv(path, columns, header)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ds = normalize(name, &table.rows, r)?;
    Ok((ds, table))
}
