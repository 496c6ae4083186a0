use serde::{Deserialize, Serialize};

use super::EngineError;

/// Piecewise-linear table with endpoint clamping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct LookupTable {
    points: Vec<(f64, f64)>,
}

impl LookupTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, EngineError> {
        if points.len() < 2 {
            return Err(EngineError::TooFewPoints(points.len()));
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(EngineError::NonFinitePoint(i));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(EngineError::UnorderedPoints {
                    index: i + 1,
                    prev: w[0].0,
                    next: w[1].0,
                });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Evaluates the table at `x`, holding the end values outside the
    /// tabulated range.
    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        let (x0, y0) = pts[0];
        let (xn, yn) = pts[pts.len() - 1];
        if x <= x0 {
            return y0;
        }
        if x >= xn {
            return yn;
        }
        // first index whose x is > the query; always in 1..len here
        let hi = pts.partition_point(|&(px, _)| px <= x);
        let (xa, ya) = pts[hi - 1];
        let (xb, yb) = pts[hi];
        if x == xa {
            return ya;
        }
        ya + (yb - ya) * (x - xa) / (xb - xa)
    }
}

impl TryFrom<Vec<(f64, f64)>> for LookupTable {
    type Error = EngineError;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(points)
    }
}

impl From<LookupTable> for Vec<(f64, f64)> {
    fn from(t: LookupTable) -> Self {
        t.points
    }
}
