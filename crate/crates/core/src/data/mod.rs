//! Historical data ingestion, trace export and chart rendering.

mod chart;
mod export;
mod series;

pub use chart::{render_svg, write_svg, Chart, ChartSeries, LineStyle, Panel};
pub use export::{format_run_csv, parse_run_csv, read_run_csv, write_run_csv};
pub use series::{derive_vulnerable, load_series, parse_series, DataBundle, TimeSeries};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("no data rows")]
    NoData,
    #[error("line {line}: years not increasing ({prev} then {year})")]
    NotIncreasing { line: usize, prev: i32, year: i32 },
    #[error("line {line}: non-finite value")]
    NonFinite { line: usize },
    #[error("series `{name}` does not cover {from}..={to}")]
    Coverage { name: String, from: i32, to: i32 },
    #[error("traces are not aligned: `{0}` has a different length than times")]
    Misaligned(String),
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.into(),
            source,
        }
    }
}
