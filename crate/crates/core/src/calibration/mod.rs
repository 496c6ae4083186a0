//! Fitting scalar model parameters to historical series.
//!
//! The objective is a normalized sum of squared errors: for each observed
//! series, residuals are divided by the series mean over the compared years,
//! squared, summed, and weighted. Years missing from either side are skipped.

mod simplex;

pub use simplex::{minimize, SimplexResult, SimplexSettings};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataBundle, TimeSeries};
use crate::engine::{RunResult, SimConfig};
use crate::model::{ModelError, ModelInputs, PretermModel};

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("empty free set")]
    EmptyFreeSet,
    #[error("free parameter `{name}`: need lower <= initial <= upper, got {lower} <= {initial} <= {upper}")]
    BadBounds {
        name: String,
        lower: f64,
        upper: f64,
        initial: f64,
    },
    #[error("no overlapping years between simulation and data for `{0}`")]
    NoOverlap(String),
    #[error("every objective evaluation was non-finite")]
    AllNonFinite,
    #[error("invalid calibration spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Observed series and the simulation trace each is compared against.
pub const SERIES: [(&str, &str); 3] = [
    ("pbr", "pbr"),
    ("total_population", "total_pop"),
    ("vulnerable_population", "vul_pop"),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    pub pbr: f64,
    pub total_population: f64,
    pub vulnerable_population: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            pbr: 1.0,
            total_population: 1.0,
            vulnerable_population: 1.0,
        }
    }
}

impl Weights {
    pub fn scaled(self, k: f64) -> Self {
        Self {
            pbr: self.pbr * k,
            total_population: self.total_population * k,
            vulnerable_population: self.vulnerable_population * k,
        }
    }

    fn get(&self, series: &str) -> f64 {
        match series {
            "pbr" => self.pbr,
            "total_population" => self.total_population,
            "vulnerable_population" => self.vulnerable_population,
            _ => 0.0,
        }
    }
}

/// Observed series keyed like [`SERIES`].
pub fn observations(data: &DataBundle) -> [(&'static str, &'static str, TimeSeries); 3] {
    [
        (SERIES[0].0, SERIES[0].1, data.pbr_history.clone()),
        (SERIES[1].0, SERIES[1].1, data.total_population.clone()),
        (SERIES[2].0, SERIES[2].1, data.vulnerable_population()),
    ]
}

/// `(sim, obs)` pairs for every year present in both.
fn overlap(run: &RunResult, trace: &str, obs: &TimeSeries) -> Vec<(f64, f64)> {
    let Some(series) = run.series(trace) else {
        return Vec::new();
    };
    series
        .filter(|(t, _)| (t - t.round()).abs() < 1e-9)
        .filter_map(|(t, sim)| obs.get(t.round() as i32).map(|o| (sim, o)))
        .collect()
}

/// Weighted normalized SSE of an existing run against the data.
pub fn score(
    run: &RunResult,
    data: &DataBundle,
    weights: &Weights,
) -> Result<f64, CalibrationError> {
    let mut total = 0.0;
    let mut compared = 0usize;
    for (key, trace, obs) in observations(data) {
        let w = weights.get(key);
        if w == 0.0 {
            continue;
        }
        let pairs = overlap(run, trace, &obs);
        if pairs.is_empty() {
            continue;
        }
        compared += pairs.len();
        let mean = pairs.iter().map(|p| p.1).sum::<f64>() / pairs.len() as f64;
        let sse: f64 = pairs.iter().map(|(s, o)| ((s - o) / mean).powi(2)).sum();
        total += w * sse;
    }
    if compared == 0 {
        return Err(CalibrationError::NoOverlap("all series".into()));
    }
    Ok(total)
}

/// Simulates `inputs` over `config` and scores the run against `data`.
pub fn objective(
    inputs: &ModelInputs,
    data: &DataBundle,
    weights: &Weights,
    config: &SimConfig,
) -> Result<f64, CalibrationError> {
    let run = PretermModel::new(inputs.clone())?.trajectory(config)?;
    score(&run, data, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesMetrics {
    pub rmse: f64,
    /// percent
    pub mape: f64,
    pub n: usize,
}

/// RMSE and MAPE for each observed series over overlapping years.
pub fn metrics(
    run: &RunResult,
    data: &DataBundle,
) -> Result<IndexMap<String, SeriesMetrics>, CalibrationError> {
    let mut out = IndexMap::new();
    for (key, trace, obs) in observations(data) {
        let pairs = overlap(run, trace, &obs);
        if pairs.is_empty() {
            return Err(CalibrationError::NoOverlap(key.to_string()));
        }
        out.insert(key.to_string(), series_metrics(&pairs));
    }
    Ok(out)
}

fn series_metrics(pairs: &[(f64, f64)]) -> SeriesMetrics {
    let n = pairs.len() as f64;
    let mse = pairs.iter().map(|(s, o)| (s - o).powi(2)).sum::<f64>() / n;
    let mape = pairs.iter().map(|(s, o)| ((s - o) / o).abs()).sum::<f64>() / n * 100.0;
    SeriesMetrics {
        rmse: mse.sqrt(),
        mape,
        n: pairs.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParameter {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// Defaults to the parameter's current value.
    #[serde(default)]
    pub initial: Option<f64>,
}

impl FreeParameter {
    pub fn new(name: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_string(),
            lower,
            upper,
            initial: None,
        }
    }

    pub fn starting_at(mut self, initial: f64) -> Self {
        self.initial = Some(initial);
        self
    }
}

/// Scalar rates and fractions that shape the population split and migration.
pub fn default_free_set() -> Vec<FreeParameter> {
    vec![
        FreeParameter::new("relative_vul_immigration", 0.0, 1.0),
        FreeParameter::new("shock_magnitude", 0.0, 0.7),
        FreeParameter::new("frac_becoming_vulnerable", 0.0, 1.0),
        FreeParameter::new("initial_percent_vul", 0.15, 0.4),
        FreeParameter::new("relative_contribution_vul", 0.3, 1.0),
    ]
}

fn default_calibration_window() -> SimConfig {
    SimConfig::default().with_window(1995.0, 2017.0)
}

/// Calibration run description, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    #[serde(default = "default_free_set")]
    pub free: Vec<FreeParameter>,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default = "default_calibration_window")]
    pub sim: SimConfig,
    #[serde(default = "default_max_evaluations")]
    pub max_evaluations: usize,
    #[serde(default = "default_ftol_rel")]
    pub ftol_rel: f64,
}

fn default_max_evaluations() -> usize {
    SimplexSettings::default().max_evaluations
}

fn default_ftol_rel() -> f64 {
    SimplexSettings::default().ftol_rel
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        Self {
            free: default_free_set(),
            weights: Weights::default(),
            sim: default_calibration_window(),
            max_evaluations: default_max_evaluations(),
            ftol_rel: default_ftol_rel(),
        }
    }
}

impl CalibrationSpec {
    pub fn from_json(text: &str) -> Result<Self, CalibrationError> {
        serde_json::from_str(text).map_err(|e| CalibrationError::Spec(e.to_string()))
    }

    pub fn settings(&self) -> SimplexSettings {
        SimplexSettings {
            max_evaluations: self.max_evaluations,
            ftol_rel: self.ftol_rel,
            ..SimplexSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub values: IndexMap<String, f64>,
    pub objective: f64,
    pub initial_objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub per_series: IndexMap<String, SeriesMetrics>,
}

impl FitResult {
    /// `base` with the fitted values applied.
    pub fn apply(&self, base: &ModelInputs) -> Result<ModelInputs, CalibrationError> {
        let mut out = base.clone();
        for (name, &v) in &self.values {
            out.set(name, v)?;
        }
        Ok(out)
    }
}

/// Fits the free parameters of `base` to `data` with a bounded simplex.
pub fn fit(
    base: &ModelInputs,
    data: &DataBundle,
    spec: &CalibrationSpec,
) -> Result<FitResult, CalibrationError> {
    if spec.free.is_empty() {
        return Err(CalibrationError::EmptyFreeSet);
    }
    spec.sim.validate().map_err(ModelError::from)?;
    let mut x0 = Vec::with_capacity(spec.free.len());
    for fp in &spec.free {
        let current = base
            .get(&fp.name)
            .ok_or_else(|| ModelError::UnknownParameter(fp.name.clone()))?;
        let initial = fp.initial.unwrap_or(current);
        if !(fp.lower <= initial && initial <= fp.upper) {
            return Err(CalibrationError::BadBounds {
                name: fp.name.clone(),
                lower: fp.lower,
                upper: fp.upper,
                initial,
            });
        }
        x0.push(initial);
    }
    let lower: Vec<f64> = spec.free.iter().map(|f| f.lower).collect();
    let upper: Vec<f64> = spec.free.iter().map(|f| f.upper).collect();

    let with_values = |x: &[f64]| -> Result<ModelInputs, CalibrationError> {
        let mut inputs = base.clone();
        for (fp, &v) in spec.free.iter().zip(x) {
            inputs.set(&fp.name, v)?;
        }
        Ok(inputs)
    };
    let eval = |x: &[f64]| -> f64 {
        with_values(x)
            .and_then(|inputs| objective(&inputs, data, &spec.weights, &spec.sim))
            .unwrap_or(f64::INFINITY)
    };

    // surfaces data problems (no overlap, bad names) before searching
    let initial_objective = objective(&with_values(&x0)?, data, &spec.weights, &spec.sim);
    let initial_objective = match initial_objective {
        Ok(v) => v,
        Err(e @ CalibrationError::NoOverlap(_)) => return Err(e),
        Err(_) => f64::INFINITY,
    };

    let found = minimize(eval, &x0, &lower, &upper, &spec.settings())?;
    let fitted = with_values(&found.x)?;
    let run = PretermModel::new(fitted)?.trajectory(&spec.sim)?;
    Ok(FitResult {
        values: spec
            .free
            .iter()
            .zip(&found.x)
            .map(|(fp, &v)| (fp.name.clone(), v))
            .collect(),
        objective: found.value,
        initial_objective,
        iterations: found.iterations,
        evaluations: found.evaluations,
        converged: found.converged,
        per_series: metrics(&run, data)?,
    })
}

/// Data bundle reproducing a model run exactly (poverty = vul / 2), for
/// self-consistency checks.
pub fn synthetic_bundle(run: &RunResult) -> Result<DataBundle, crate::data::DataError> {
    let series = |trace: &str, name: &str, scale: f64| {
        let points = run
            .series(trace)
            .map(|s| s.map(|(t, v)| (t.round() as i32, v * scale)).collect())
            .unwrap_or_default();
        TimeSeries::new(name, points)
    };
    Ok(DataBundle {
        pbr_history: series("pbr", "pbr", 1.0)?,
        total_population: series("total_pop", "total_population", 1.0)?,
        poverty_below_fpl: series("vul_pop", "poverty_below_fpl", 0.5)?,
        crime_rate: None,
    })
}
