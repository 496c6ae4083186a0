//! Scenario-vs-reference summaries for `compare`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// scenario moved from below the reference to above it
    Above,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub year: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFindings {
    pub scenario: String,
    /// First entry is the earliest persistent crossing.
    pub crossings: Vec<Crossing>,
    pub max_abs_delta: f64,
    /// `(year, scenario - reference)` at every save
    pub deltas: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableFindings {
    pub variable: String,
    pub scenarios: Vec<SeriesFindings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Findings {
    pub reference: String,
    pub variables: Vec<VariableFindings>,
}

impl Findings {
    pub fn variable(&self, name: &str) -> Option<&VariableFindings> {
        self.variables.iter().find(|v| v.variable == name)
    }
}

impl VariableFindings {
    pub fn scenario(&self, name: &str) -> Option<&SeriesFindings> {
        self.scenarios.iter().find(|s| s.scenario == name)
    }
}

impl SeriesFindings {
    pub fn delta_at(&self, year: f64) -> Option<f64> {
        self.deltas
            .iter()
            .find(|(t, _)| (t - year).abs() < 1e-9)
            .map(|d| d.1)
    }
}

/// Years where the sign of `delta` flips and then holds for at least
/// `persist` further saves. Zero deltas carry no sign and are skipped.
pub fn crossings(times: &[f64], delta: &[f64], persist: usize) -> Vec<Crossing> {
    let sign = |v: f64| {
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };
    let mut out = Vec::new();
    let mut current = 0;
    for (i, &d) in delta.iter().enumerate() {
        let s = sign(d);
        if s == 0 || s == current {
            continue;
        }
        if current == 0 {
            current = s;
            continue;
        }
        let rest = &delta[i + 1..];
        let holds = rest.len() >= persist && rest[..persist].iter().all(|&v| sign(v) == s);
        if holds {
            out.push(Crossing {
                year: times[i],
                direction: if s > 0 {
                    Direction::Above
                } else {
                    Direction::Below
                },
            });
            current = s;
        }
    }
    out
}

pub fn compare_series(
    scenario: &str,
    times: &[f64],
    reference: &[f64],
    values: &[f64],
) -> SeriesFindings {
    let deltas: Vec<(f64, f64)> = times
        .iter()
        .zip(reference.iter().zip(values))
        .map(|(&t, (r, v))| (t, v - r))
        .collect();
    let raw: Vec<f64> = deltas.iter().map(|d| d.1).collect();
    SeriesFindings {
        scenario: scenario.to_string(),
        crossings: crossings(times, &raw, 2),
        max_abs_delta: raw.iter().fold(0.0, |m, d| m.max(d.abs())),
        deltas,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn years(n: usize) -> Vec<f64> {
        (0..n).map(|i| 2000.0 + i as f64).collect()
    }

    #[test]
    fn persistent_flip_is_reported() {
        let d = [-1.0, -1.0, 1.0, 1.0, 1.0];
        let c = crossings(&years(5), &d, 2);
        assert_eq!(
            c,
            vec![Crossing {
                year: 2002.0,
                direction: Direction::Above
            }]
        );
    }

    #[test]
    fn single_save_wiggle_ignored() {
        let d = [-1.0, 1.0, -1.0, -1.0, -1.0];
        assert!(crossings(&years(5), &d, 2).is_empty());
    }

    #[test]
    fn flip_too_close_to_end_ignored() {
        let d = [-1.0, -1.0, -1.0, 1.0, 1.0];
        assert!(crossings(&years(5), &d, 2).is_empty());
    }

    #[test]
    fn zeros_skipped() {
        let d = [0.0, -1.0, 0.0, 1.0, 1.0, 1.0];
        let c = crossings(&years(6), &d, 2);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].year, 2003.0);
        assert!(crossings(&years(4), &[0.0; 4], 2).is_empty());
    }

    #[test]
    fn several_flips() {
        let d = [1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
        let c = crossings(&years(8), &d, 2);
        let ys: Vec<f64> = c.iter().map(|c| c.year).collect();
        assert_eq!(ys, vec![2002.0, 2005.0]);
        assert_eq!(c[0].direction, Direction::Below);
    }

    #[test]
    fn identical_series_give_zero_deltas() {
        let t = years(3);
        let v = [1.0, 2.0, 3.0];
        let f = compare_series("base", &t, &v, &v);
        assert!(f.deltas.iter().all(|d| d.1 == 0.0));
        assert_eq!(f.max_abs_delta, 0.0);
        assert!(f.crossings.is_empty());
        assert_eq!(f.delta_at(2001.0), Some(0.0));
    }
}
