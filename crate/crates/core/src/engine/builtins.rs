use serde::{Deserialize, Serialize};

use super::EngineError;

/// 1 on the right-open window `[start, start + width)`, 0 elsewhere.
pub fn pulse(t: f64, start: f64, width: f64) -> f64 {
    if t >= start && t < start + width {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstOrderKind {
    /// DELAY1/DELAY1I: the level holds material in transit (input x time).
    MaterialDelay,
    /// SMOOTH: the level is the smoothed value itself.
    InformationSmooth,
}

/// Internal state of a first-order delay or exponential smooth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderState {
    level: f64,
    tau: f64,
    kind: FirstOrderKind,
}

impl FirstOrderState {
    pub fn new(kind: FirstOrderKind, init_output: f64, tau: f64) -> Result<Self, EngineError> {
        if tau.is_nan() || tau <= 0.0 || tau.is_infinite() {
            return Err(EngineError::InvalidTau(tau));
        }
        let level = match kind {
            FirstOrderKind::MaterialDelay => init_output * tau,
            FirstOrderKind::InformationSmooth => init_output,
        };
        Ok(Self { level, tau, kind })
    }

    /// Rebuilds a state from a raw level, as stored in a flat state vector.
    pub fn from_level(kind: FirstOrderKind, level: f64, tau: f64) -> Result<Self, EngineError> {
        let mut s = Self::new(kind, 0.0, tau)?;
        s.level = level;
        Ok(s)
    }

    pub fn kind(&self) -> FirstOrderKind {
        self.kind
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn output(&self) -> f64 {
        match self.kind {
            FirstOrderKind::MaterialDelay => self.level / self.tau,
            FirstOrderKind::InformationSmooth => self.level,
        }
    }

    /// Time derivative of the level for the given input.
    pub fn level_rate(&self, input: f64) -> f64 {
        match self.kind {
            FirstOrderKind::MaterialDelay => input - self.output(),
            FirstOrderKind::InformationSmooth => (input - self.level) / self.tau,
        }
    }

    /// One explicit Euler step. Returns the advanced state and the output
    /// seen at the start of the step.
    pub fn step(&self, input: f64, dt: f64) -> (Self, f64) {
        let out = self.output();
        let next = Self {
            level: self.level + dt * self.level_rate(input),
            ..*self
        };
        (next, out)
    }
}
