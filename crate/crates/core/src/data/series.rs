use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;

/// Year-indexed values with strictly increasing years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub name: String,
    points: Vec<(i32, f64)>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, points: Vec<(i32, f64)>) -> Result<Self, DataError> {
        for (i, &(_, v)) in points.iter().enumerate() {
            if !v.is_finite() {
                return Err(DataError::NonFinite { line: i + 1 });
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(DataError::NotIncreasing {
                    line: i + 2,
                    prev: w[0].0,
                    year: w[1].0,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            points,
        })
    }

    pub fn points(&self) -> &[(i32, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        self.points
            .binary_search_by_key(&year, |&(y, _)| y)
            .ok()
            .map(|i| self.points[i].1)
    }

    pub fn first_year(&self) -> Option<i32> {
        self.points.first().map(|p| p.0)
    }

    pub fn last_year(&self) -> Option<i32> {
        self.points.last().map(|p| p.0)
    }

    /// Points with `from <= year <= to`.
    pub fn window(&self, from: i32, to: i32) -> TimeSeries {
        TimeSeries {
            name: self.name.clone(),
            points: self
                .points
                .iter()
                .copied()
                .filter(|&(y, _)| y >= from && y <= to)
                .collect(),
        }
    }

    pub fn covers(&self, from: i32, to: i32) -> bool {
        (from..=to).all(|y| self.get(y).is_some())
    }

    pub fn mean(&self) -> Option<f64> {
        if self.points.is_empty() {
            None
        } else {
            Some(self.points.iter().map(|p| p.1).sum::<f64>() / self.points.len() as f64)
        }
    }
}

/// Parses `year,value` CSV text.
pub fn parse_series(text: &str, name: &str) -> Result<TimeSeries, DataError> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => break (i + 1, l),
            None => return Err(DataError::NoData),
        }
    };
    let cols: Vec<&str> = header
        .1
        .trim_start_matches('\u{feff}')
        .split(',')
        .map(str::trim)
        .collect();
    if cols != ["year", "value"] {
        return Err(DataError::Malformed {
            line: header.0,
            message: format!("expected header `year,value`, got `{}`", header.1.trim()),
        });
    }

    let mut points: Vec<(i32, f64)> = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let mut fields = row.split(',').map(str::trim);
        let (Some(y), Some(v), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(DataError::Malformed {
                line,
                message: format!("expected 2 fields in `{row}`"),
            });
        };
        let year: i32 = y.parse().map_err(|_| DataError::Malformed {
            line,
            message: format!("bad year `{y}`"),
        })?;
        let value: f64 = v.parse().map_err(|_| DataError::Malformed {
            line,
            message: format!("bad value `{v}`"),
        })?;
        if !value.is_finite() {
            return Err(DataError::NonFinite { line });
        }
        if let Some(&(prev, _)) = points.last() {
            if year <= prev {
                return Err(DataError::NotIncreasing { line, prev, year });
            }
        }
        points.push((year, value));
    }
    if points.is_empty() {
        return Err(DataError::NoData);
    }
    Ok(TimeSeries {
        name: name.to_string(),
        points,
    })
}

pub fn load_series(path: impl AsRef<Path>, name: &str) -> Result<TimeSeries, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    parse_series(&text, name)
}

/// Vulnerable population proxy: twice the count below the poverty threshold.
pub fn derive_vulnerable(poverty: &TimeSeries) -> TimeSeries {
    TimeSeries {
        name: "vulnerable_population".to_string(),
        points: poverty.points.iter().map(|&(y, v)| (y, 2.0 * v)).collect(),
    }
}

/// Historical series for one county.
#[derive(Debug, Clone, PartialEq)]
pub struct DataBundle {
    /// percent
    pub pbr_history: TimeSeries,
    /// people
    pub total_population: TimeSeries,
    /// people below the poverty threshold
    pub poverty_below_fpl: TimeSeries,
    /// crimes per 100k per year
    pub crime_rate: Option<TimeSeries>,
}

impl DataBundle {
    pub const PBR_FILE: &'static str = "pbr.csv";
    pub const POPULATION_FILE: &'static str = "population.csv";
    pub const POVERTY_FILE: &'static str = "poverty.csv";
    pub const CRIME_FILE: &'static str = "crime.csv";

    /// Loads `pbr.csv`, `population.csv`, `poverty.csv` and, if present,
    /// `crime.csv` from `dir`.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, DataError> {
        let dir = dir.as_ref();
        let crime_path = dir.join(Self::CRIME_FILE);
        Ok(Self {
            pbr_history: load_series(dir.join(Self::PBR_FILE), "pbr")?,
            total_population: load_series(dir.join(Self::POPULATION_FILE), "total_population")?,
            poverty_below_fpl: load_series(dir.join(Self::POVERTY_FILE), "poverty_below_fpl")?,
            crime_rate: if crime_path.exists() {
                Some(load_series(crime_path, "crime_rate")?)
            } else {
                None
            },
        })
    }

    pub fn vulnerable_population(&self) -> TimeSeries {
        derive_vulnerable(&self.poverty_below_fpl)
    }

    /// Errors unless PBR and population cover every year of `from..=to`.
    pub fn check_coverage(&self, from: i32, to: i32) -> Result<(), DataError> {
        for s in [&self.pbr_history, &self.total_population] {
            if !s.covers(from, to) {
                return Err(DataError::Coverage {
                    name: s.name.clone(),
                    from,
                    to,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_rows() {
        let s = parse_series("year,value\n1995,11.21\n1996,11.94\n", "pbr").unwrap();
        assert_eq!(s.points(), &[(1995, 11.21), (1996, 11.94)]);
        assert_eq!(s.get(1996), Some(11.94));
        assert_eq!(s.get(1997), None);
    }

    #[test]
    fn tolerates_crlf_and_blank_lines() {
        let s = parse_series("year,value\r\n\r\n2000,1\r\n2001,2\r\n", "x").unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn empty_file_has_no_data_rows() {
        assert!(matches!(parse_series("", "x"), Err(DataError::NoData)));
        let e = parse_series("year,value\n", "x").unwrap_err();
        assert_eq!(e.to_string(), "no data rows");
    }

    #[test]
    fn rejects_unordered_years() {
        let e = parse_series("year,value\n1995,1\n1997,2\n1996,3\n", "x").unwrap_err();
        assert!(matches!(
            e,
            DataError::NotIncreasing {
                line: 4,
                prev: 1997,
                year: 1996
            }
        ));
        assert!(e.to_string().contains("years not increasing"));
    }

    #[test]
    fn malformed_rows_report_line() {
        let e = parse_series("year,value\n1995,1\n1996;2\n", "x").unwrap_err();
        assert!(matches!(e, DataError::Malformed { line: 3, .. }), "{e}");
        let e = parse_series("year,value\n1995,abc\n", "x").unwrap_err();
        assert!(matches!(e, DataError::Malformed { line: 2, .. }));
        let e = parse_series("year,value\n1995,NaN\n", "x").unwrap_err();
        assert!(matches!(e, DataError::NonFinite { line: 2 }));
        let e = parse_series("yr,val\n1995,1\n", "x").unwrap_err();
        assert!(matches!(e, DataError::Malformed { line: 1, .. }));
    }

    #[test]
    fn doubling() {
        let p = TimeSeries::new("poverty", vec![(2000, 100_000.0)]).unwrap();
        let v = derive_vulnerable(&p);
        assert_eq!(v.points(), &[(2000, 200_000.0)]);
        assert_eq!(v.name, "vulnerable_population");
        let empty = TimeSeries::new("poverty", vec![]).unwrap();
        assert!(derive_vulnerable(&empty).is_empty());
    }

    fn series_strategy() -> impl Strategy<Value = TimeSeries> {
        prop::collection::vec((1u8..4, 0.0f64..1e6), 0..40).prop_map(|steps| {
            let mut year = 1990;
            let pts = steps
                .into_iter()
                .map(|(dy, v)| {
                    year += dy as i32;
                    (year, v)
                })
                .collect();
            TimeSeries::new("poverty", pts).unwrap()
        })
    }

    proptest! {
        #[test]
        fn derive_preserves_years(s in series_strategy()) {
            let v = derive_vulnerable(&s);
            let ys: Vec<i32> = s.points().iter().map(|p| p.0).collect();
            let vs: Vec<i32> = v.points().iter().map(|p| p.0).collect();
            prop_assert_eq!(ys, vs);
        }

        #[test]
        fn derive_commutes_with_window(s in series_strategy(), a in 1990i32..2100, b in 1990i32..2100) {
            prop_assert_eq!(derive_vulnerable(&s.window(a, b)), derive_vulnerable(&s).window(a, b));
        }

        #[test]
        fn text_round_trip(s in series_strategy()) {
            prop_assume!(!s.is_empty());
            let mut text = String::from("year,value\n");
            for (y, v) in s.points() {
                text.push_str(&format!("{y},{v}\n"));
            }
            prop_assert_eq!(parse_series(&text, "poverty").unwrap(), s);
        }
    }
}
