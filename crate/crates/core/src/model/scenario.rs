use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::params::ModelInputs;
use super::ModelError;

/// Base run, the two policy scenarios, or a free-form override set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioName {
    Base,
    /// Deeper financial shock: 22% instead of 15% become vulnerable.
    S1,
    /// Desired PBR lowered from 11.2 to 9.
    S2,
    Custom,
}

impl ScenarioName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::Base => "base",
            ScenarioName::S1 => "s1",
            ScenarioName::S2 => "s2",
            ScenarioName::Custom => "custom",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "base" => Ok(ScenarioName::Base),
            "s1" => Ok(ScenarioName::S1),
            "s2" => Ok(ScenarioName::S2),
            "custom" => Ok(ScenarioName::Custom),
            _ => Err(ModelError::UnknownScenario(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: ScenarioName,
    #[serde(default)]
    pub overrides: IndexMap<String, f64>,
}

impl ScenarioSpec {
    pub fn new(name: ScenarioName) -> Self {
        Self {
            name,
            overrides: IndexMap::new(),
        }
    }

    pub fn with_override(mut self, name: impl Into<String>, value: f64) -> Self {
        self.overrides.insert(name.into(), value);
        self
    }
}

/// S1 scales the fraction becoming vulnerable by 22/15.
pub const S1_VULNERABLE_SCALE: f64 = 22.0 / 15.0;
pub const S2_DESIRED_PBR: f64 = 9.0;

/// Applies the named scenario and then every override verbatim.
pub fn build_scenario(base: &ModelInputs, spec: &ScenarioSpec) -> Result<ModelInputs, ModelError> {
    let mut out = base.clone();
    match spec.name {
        ScenarioName::Base | ScenarioName::Custom => {}
        ScenarioName::S1 => out.parameters.frac_becoming_vulnerable *= S1_VULNERABLE_SCALE,
        ScenarioName::S2 => out.parameters.desired_pbr = S2_DESIRED_PBR,
    }
    for (name, &value) in &spec.overrides {
        out.set(name, value)?;
    }
    out.parameters.validate()?;
    Ok(out)
}

/// Parses a flat JSON object of `name -> number` overrides.
pub fn parse_overrides(json: &str) -> Result<IndexMap<String, f64>, ModelError> {
    let map: IndexMap<String, f64> =
        serde_json::from_str(json).map_err(|e| ModelError::Overrides(e.to_string()))?;
    let probe = ModelInputs::default();
    for name in map.keys() {
        if probe.get(name).is_none() {
            return Err(ModelError::UnknownParameter(name.clone()));
        }
    }
    Ok(map)
}

/// Parses a `name=value` command-line override.
pub fn parse_assignment(s: &str) -> Result<(String, f64), ModelError> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| ModelError::Overrides(format!("expected name=value, got `{s}`")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| ModelError::Overrides(format!("`{value}` is not a number in `{s}`")))?;
    Ok((name.trim().to_string(), value))
}
