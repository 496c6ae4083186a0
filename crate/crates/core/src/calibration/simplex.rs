//! Bounded Nelder-Mead simplex search.

use super::CalibrationError;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexSettings {
    pub max_evaluations: usize,
    /// Stop once `f_worst - f_best <= ftol_rel * |f_best|`.
    pub ftol_rel: f64,
    /// ...and every vertex lies within `xtol_rel * (bound width)` of the best
    /// one in each coordinate. Guards against symmetric vertices with equal
    /// values around a minimum.
    pub xtol_rel: f64,
    /// Initial vertex offset as a fraction of each coordinate (or of the
    /// bound width for coordinates at zero).
    pub initial_step: f64,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        Self {
            max_evaluations: 2000,
            ftol_rel: 1e-8,
            xtol_rel: 1e-6,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Objective evaluated at the projection of `x` onto the box.
struct Counted<'a, F> {
    f: F,
    lower: &'a [f64],
    upper: &'a [f64],
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<'_, F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let mut p = x.to_vec();
        clip(&mut p, self.lower, self.upper);
        let v = (self.f)(&p);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }
}

fn clip(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

fn collapsed(simplex: &[(Vec<f64>, f64)], lower: &[f64], upper: &[f64], xtol_rel: f64) -> bool {
    let best = &simplex[0].0;
    simplex[1..].iter().all(|(x, _)| {
        x.iter()
            .zip(best)
            .zip(lower.iter().zip(upper))
            .all(|((v, b), (lo, hi))| {
                (v.clamp(*lo, *hi) - b.clamp(*lo, *hi)).abs() <= xtol_rel * (hi - lo).max(1.0)
            })
    })
}

/// `a + t * (b - a)`
fn toward(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
}

/// Minimizes `f` over the box `[lower, upper]` starting from `x0`.
///
/// Vertices move freely; `f` is always evaluated at the vertex clipped to
/// the box, so the simplex keeps its dimension when the optimum sits on a
/// bound. Non-finite objective values are treated as +inf. The returned point is
/// the best vertex seen, so its value never exceeds `f(x0)`.
pub fn minimize<F>(
    f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    settings: &SimplexSettings,
) -> Result<SimplexResult, CalibrationError>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(CalibrationError::EmptyFreeSet);
    }
    assert!(lower.len() == n && upper.len() == n, "bounds must match x0");
    let mut f = Counted {
        f,
        lower,
        upper,
        evaluations: 0,
    };

    let mut start = x0.to_vec();
    clip(&mut start, lower, upper);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = f.call(&start);
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut x = start.clone();
        let width = upper[i] - lower[i];
        let mut step = if start[i] != 0.0 {
            settings.initial_step * start[i].abs()
        } else {
            settings.initial_step * width
        };
        if step == 0.0 {
            step = settings.initial_step;
        }
        if start[i] + step > upper[i] {
            step = -step;
        }
        x[i] += step;
        let v = f.call(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if best.is_infinite() && worst.is_infinite() {
            return Err(CalibrationError::AllNonFinite);
        }
        if worst - best <= settings.ftol_rel * best.abs()
            && collapsed(&simplex, lower, upper, settings.xtol_rel)
        {
            converged = true;
            break;
        }
        if f.evaluations >= settings.max_evaluations {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let (xw, fw) = simplex[n].clone();
        let f_second = simplex[n - 1].1;

        let xr = toward(&centroid, &xw, -REFLECT);
        let fr = f.call(&xr);
        if fr < best {
            let xe = toward(&centroid, &xr, EXPAND);
            let fe = f.call(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr < fw {
            let xc = toward(&centroid, &xr, CONTRACT);
            let fc = f.call(&xc);
            (xc, fc, fc <= fr)
        } else {
            let xc = toward(&centroid, &xw, CONTRACT);
            let fc = f.call(&xc);
            (xc, fc, fc < fw)
        };
        if accept {
            simplex[n] = (xc, fc);
            continue;
        }
        let xb = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = toward(&xb, &vertex.0, SHRINK);
            let v = f.call(&x);
            *vertex = (x, v);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (mut x, value) = simplex.swap_remove(0);
    clip(&mut x, lower, upper);
    Ok(SimplexResult {
        x,
        value,
        iterations,
        evaluations: f.evaluations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let r = minimize(
            |x| (x[0] - 3.7).powi(2) + 2.0,
            &[1.0],
            &[0.0],
            &[10.0],
            &SimplexSettings::default(),
        )
        .unwrap();
        assert!((r.x[0] - 3.7).abs() < 1e-4, "{:?}", r);
        assert!(r.evaluations <= 2000);
    }

    #[test]
    fn rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let settings = SimplexSettings {
            ftol_rel: 1e-14,
            ..Default::default()
        };
        let r = minimize(rosen, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], &settings).unwrap();
        assert!(
            (r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3,
            "{:?}",
            r
        );
    }

    #[test]
    fn respects_bounds() {
        // unconstrained minimum at -2 lies outside the box
        let r = minimize(
            |x| (x[0] + 2.0).powi(2),
            &[3.0],
            &[0.5],
            &[5.0],
            &SimplexSettings::default(),
        )
        .unwrap();
        assert!(r.x[0] >= 0.5);
        assert!((r.x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn already_optimal_start() {
        let r = minimize(
            |x| x[0] * x[0] + x[1] * x[1] + 1.0,
            &[0.0, 0.0],
            &[-1.0, -1.0],
            &[1.0, 1.0],
            &SimplexSettings::default(),
        )
        .unwrap();
        assert_eq!(r.x, vec![0.0, 0.0]);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn never_worse_than_start() {
        let bumpy = |x: &[f64]| (5.0 * x[0]).sin() + (3.0 * x[1]).cos() + 0.1 * x[0] * x[1];
        for start in [[0.3, 0.2], [-1.0, 2.0], [2.5, -0.5]] {
            let r = minimize(
                bumpy,
                &start,
                &[-3.0; 2],
                &[3.0; 2],
                &SimplexSettings::default(),
            )
            .unwrap();
            assert!(r.value <= bumpy(&start));
        }
    }

    #[test]
    fn non_finite_regions() {
        let r = minimize(
            |x| {
                if x[0] < 1.0 {
                    f64::NAN
                } else {
                    (x[0] - 2.0).powi(2)
                }
            },
            &[1.5],
            &[0.0],
            &[4.0],
            &SimplexSettings::default(),
        )
        .unwrap();
        assert!((r.x[0] - 2.0).abs() < 1e-4);

        let e = minimize(
            |_| f64::NAN,
            &[1.0, 1.0],
            &[0.0; 2],
            &[2.0; 2],
            &SimplexSettings::default(),
        );
        assert!(matches!(e, Err(CalibrationError::AllNonFinite)));
    }

    #[test]
    fn empty_problem() {
        assert!(matches!(
            minimize(|_| 0.0, &[], &[], &[], &SimplexSettings::default()),
            Err(CalibrationError::EmptyFreeSet)
        ));
    }
}
