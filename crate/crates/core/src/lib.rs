//! Stock-and-flow simulation of preterm birth dynamics in a single county.
//!
//! The crate is split into four layers:
//!
//! * [`engine`]: a small system-dynamics substrate (lookup tables, pulse,
//!   first-order delays and smooths, fixed-step Euler integration).
//! * [`model`]: the three-sector population / resources / crime model and
//!   its policy scenarios.
//! * [`data`]: historical series ingestion, trace export and SVG charts.
//! * [`calibration`]: a bounded simplex fit of scalar parameters against
//!   historical series.

pub mod calibration;
pub mod data;
pub mod engine;
pub mod model;

pub use engine::{LookupTable, RunResult, SimConfig};
pub use model::{ModelInputs, Parameters, PretermModel, ScenarioSpec, Switches};
