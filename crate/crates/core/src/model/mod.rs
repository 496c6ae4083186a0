//! The population / resources / crime model of county preterm birth rates.

mod params;
mod scenario;
pub mod sectors;
mod system;

pub use params::{ModelInputs, Parameters, Switches};
pub use scenario::{
    build_scenario, parse_assignment, parse_overrides, ScenarioName, ScenarioSpec,
    S1_VULNERABLE_SCALE, S2_DESIRED_PBR,
};
pub use system::{ModelState, PretermModel, STATE_NAMES};

use thiserror::Error;

use crate::engine::EngineError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("unknown scenario `{0}` (expected base, s1, s2 or custom)")]
    UnknownScenario(String),
    #[error("parameter `{name}` = {value} must be {expected}")]
    OutOfRange {
        name: String,
        value: f64,
        expected: &'static str,
    },
    #[error("invalid overrides: {0}")]
    Overrides(String),
    #[error("total births are zero; PBR undefined")]
    ZeroBirths,
    #[error(transparent)]
    Engine(#[from] EngineError),
}
