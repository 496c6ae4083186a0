//! Generic simulation substrate: builtins and the fixed-step run loop.

mod builtins;
mod integrate;
mod lookup;

pub use builtins::{pulse, FirstOrderKind, FirstOrderState};
pub use integrate::{euler_step, run, Record, RunResult, SimConfig, System};
pub use lookup::LookupTable;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("lookup table needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("lookup table x values must be strictly increasing (index {index}: {prev} -> {next})")]
    UnorderedPoints { index: usize, prev: f64, next: f64 },
    #[error("lookup table contains a non-finite point at index {0}")]
    NonFinitePoint(usize),
    #[error("time constant must be positive and finite, got {0}")]
    InvalidTau(f64),
    #[error("length mismatch: {stocks} stocks but {flows} flows")]
    LengthMismatch { stocks: usize, flows: usize },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("non-finite value for `{variable}` at t = {time}")]
    NonFinite { time: f64, variable: String },
}
