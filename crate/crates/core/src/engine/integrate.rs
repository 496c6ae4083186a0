use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub start_time: f64,
    pub end_time: f64,
    pub dt: f64,
    pub save_interval: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            start_time: 1995.0,
            end_time: 2022.0,
            dt: 1.0 / 16.0,
            save_interval: 1.0,
        }
    }
}

impl SimConfig {
    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    pub fn with_window(self, start_time: f64, end_time: f64) -> Self {
        Self {
            start_time,
            end_time,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        let all = [self.start_time, self.end_time, self.dt, self.save_interval];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all times must be finite".into());
        }
        if self.start_time >= self.end_time {
            return bad(format!(
                "start_time {} must be before end_time {}",
                self.start_time, self.end_time
            ));
        }
        if self.dt <= 0.0 || self.save_interval <= 0.0 {
            return bad("dt and save_interval must be positive".into());
        }
        let ratio = self.save_interval / self.dt;
        if ratio < 1.0 - 1e-12 || (ratio - ratio.round()).abs() * self.dt > 1e-12 {
            return bad(format!(
                "dt {} does not evenly divide save_interval {}",
                self.dt, self.save_interval
            ));
        }
        let span = (self.end_time - self.start_time) / self.dt;
        if (span - span.round()).abs() * self.dt > 1e-9 {
            return bad(format!(
                "dt {} does not evenly divide the window {}..{}",
                self.dt, self.start_time, self.end_time
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.end_time - self.start_time) / self.dt).round() as usize
    }

    fn steps_per_save(&self) -> usize {
        (self.save_interval / self.dt).round() as usize
    }
}

/// Auxiliary values produced by one model evaluation, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Record {
    entries: Vec<(&'static str, f64)>,
}

impl Record {
    pub fn set(&mut self, name: &'static str, value: f64) {
        self.entries.push((name, value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|&(_, v)| v)
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.entries.iter().copied()
    }
}

/// A continuous system integrated over a flat state vector.
pub trait System {
    fn state_names(&self) -> &[&'static str];

    /// Fills `rates` with d(state)/dt at `(t, state)` and records every
    /// auxiliary that should be traced.
    fn evaluate(
        &self,
        t: f64,
        state: &[f64],
        rates: &mut [f64],
        record: &mut Record,
    ) -> Result<(), EngineError>;
}

/// `stock_i + dt * flow_i` elementwise.
pub fn euler_step(stocks: &[f64], net_flows: &[f64], dt: f64) -> Result<Vec<f64>, EngineError> {
    if stocks.len() != net_flows.len() {
        return Err(EngineError::LengthMismatch {
            stocks: stocks.len(),
            flows: net_flows.len(),
        });
    }
    Ok(stocks
        .iter()
        .zip(net_flows)
        .map(|(s, f)| s + dt * f)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunResult {
    pub times: Vec<f64>,
    pub traces: IndexMap<String, Vec<f64>>,
}

impl RunResult {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.traces.get(name).map(Vec::as_slice)
    }

    /// Value of `name` at the saved time closest to `time`, if within 1e-9.
    pub fn value_at(&self, name: &str, time: f64) -> Option<f64> {
        let idx = self.times.iter().position(|t| (t - time).abs() < 1e-9)?;
        self.get(name).map(|v| v[idx])
    }

    /// Iterates `(time, value)` pairs of one trace.
    pub fn series<'a>(&'a self, name: &str) -> Option<impl Iterator<Item = (f64, f64)> + 'a> {
        let v = self.traces.get(name)?;
        Some(self.times.iter().copied().zip(v.iter().copied()))
    }
}

fn check_finite<'a>(
    t: f64,
    values: impl IntoIterator<Item = (&'a str, f64)>,
) -> Result<(), EngineError> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(EngineError::NonFinite {
                time: t,
                variable: name.to_string(),
            });
        }
    }
    Ok(())
}

/// Integrates `system` from `config.start_time` to `config.end_time` with
/// fixed-step Euler, saving every auxiliary each `save_interval`.
pub fn run<S: System + ?Sized>(
    system: &S,
    config: &SimConfig,
    initial_state: &[f64],
) -> Result<RunResult, EngineError> {
    config.validate()?;
    let names = system.state_names();
    if names.len() != initial_state.len() {
        return Err(EngineError::LengthMismatch {
            stocks: initial_state.len(),
            flows: names.len(),
        });
    }
    check_finite(
        config.start_time,
        names.iter().copied().zip(initial_state.iter().copied()),
    )?;

    let steps = config.steps();
    let per_save = config.steps_per_save();
    let mut state = initial_state.to_vec();
    let mut rates = vec![0.0; state.len()];
    let mut record = Record::default();
    let mut result = RunResult::default();

    for i in 0..=steps {
        let t = config.start_time + i as f64 * config.dt;
        record.clear();
        rates.iter_mut().for_each(|r| *r = 0.0);
        system.evaluate(t, &state, &mut rates, &mut record)?;
        check_finite(t, record.iter())?;
        check_finite(t, names.iter().copied().zip(rates.iter().copied()))?;

        if i % per_save == 0 {
            if result.times.is_empty() {
                for (name, v) in record.iter() {
                    result.traces.insert(name.to_string(), vec![v]);
                }
            } else {
                if record.entries.len() != result.traces.len() {
                    return Err(EngineError::InvalidConfig(format!(
                        "auxiliary set changed at t = {t}"
                    )));
                }
                for ((name, v), (key, trace)) in record.iter().zip(result.traces.iter_mut()) {
                    if name != key {
                        return Err(EngineError::InvalidConfig(format!(
                            "auxiliary `{name}` out of order at t = {t}"
                        )));
                    }
                    trace.push(v);
                }
            }
            result.times.push(t);
        }
        if i == steps {
            break;
        }
        for (s, r) in state.iter_mut().zip(&rates) {
            *s += config.dt * r;
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant;

    impl System for Constant {
        fn state_names(&self) -> &[&'static str] {
            &["a", "b"]
        }
        fn evaluate(
            &self,
            _t: f64,
            s: &[f64],
            _r: &mut [f64],
            rec: &mut Record,
        ) -> Result<(), EngineError> {
            rec.set("a", s[0]);
            rec.set("b", s[1]);
            Ok(())
        }
    }

    /// dx/dt = 1 / (2000 - t): blows up at 2000.
    struct Blowup;

    impl System for Blowup {
        fn state_names(&self) -> &[&'static str] {
            &["x"]
        }
        fn evaluate(
            &self,
            t: f64,
            s: &[f64],
            r: &mut [f64],
            rec: &mut Record,
        ) -> Result<(), EngineError> {
            r[0] = 1.0 / (2000.0 - t);
            rec.set("x", s[0]);
            rec.set("rate", r[0]);
            Ok(())
        }
    }

    #[test]
    fn euler_step_examples() {
        assert_eq!(euler_step(&[10.0], &[2.0], 0.5).unwrap(), vec![11.0]);
        assert_eq!(
            euler_step(&[1.0, 2.0], &[0.0, 0.0], 0.1).unwrap(),
            vec![1.0, 2.0]
        );
        assert_eq!(euler_step(&[0.0], &[-4.0], 0.25).unwrap(), vec![-1.0]);
        assert_eq!(
            euler_step(&[0.0], &[1.0, 2.0], 0.25),
            Err(EngineError::LengthMismatch {
                stocks: 1,
                flows: 2
            })
        );
    }

    #[test]
    fn euler_telescopes_exactly() {
        // dyadic dt and integer flows keep every partial sum exact
        let dt = 1.0 / 16.0;
        let flows: Vec<f64> = (0..400).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let mut s = vec![100.0];
        for f in &flows {
            s = euler_step(&s, &[*f], dt).unwrap();
        }
        assert_eq!(s[0], 100.0 + dt * flows.iter().sum::<f64>());
    }

    #[test]
    fn zero_flows_give_constant_traces() {
        let r = run(&Constant, &SimConfig::default(), &[3.0, -2.0]).unwrap();
        assert_eq!(r.len(), 28);
        assert!(r.get("a").unwrap().iter().all(|&v| v == 3.0));
        assert!(r.get("b").unwrap().iter().all(|&v| v == -2.0));
        assert_eq!(r.times[0], 1995.0);
        assert_eq!(*r.times.last().unwrap(), 2022.0);
        assert_eq!(r.value_at("a", 2010.0), Some(3.0));
    }

    #[test]
    fn save_points_follow_interval() {
        let cfg = SimConfig {
            start_time: 0.0,
            end_time: 10.0,
            dt: 0.25,
            save_interval: 2.0,
        };
        let r = run(&Constant, &cfg, &[0.0, 0.0]).unwrap();
        assert_eq!(r.times, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
    }

    #[test]
    fn non_finite_aborts_with_time_and_name() {
        let cfg = SimConfig::default().with_dt(1.0);
        let err = run(&Blowup, &cfg, &[0.0]).unwrap_err();
        assert_eq!(
            err,
            EngineError::NonFinite {
                time: 2000.0,
                variable: "rate".into()
            }
        );
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let base = SimConfig::default();
        assert!(base.with_window(2000.0, 1995.0).validate().is_err());
        assert!(base.with_dt(0.0).validate().is_err());
        assert!(base.with_dt(0.3).validate().is_err());
        assert!(base.with_dt(2.0).validate().is_err());
        assert!(base.with_dt(1.0 / 64.0).validate().is_ok());
        assert!(run(&Constant, &base.with_dt(-1.0), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn deterministic_bitwise() {
        let cfg = SimConfig::default().with_dt(1.0 / 32.0);
        let a = run(&Blowup, &cfg.with_window(1900.0, 1990.0), &[1.0]).unwrap();
        let b = run(&Blowup, &cfg.with_window(1900.0, 1990.0), &[1.0]).unwrap();
        assert_eq!(a, b);
    }
}
