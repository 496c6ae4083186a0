use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;

use super::DataError;
use crate::engine::RunResult;

/// Formats a run as CSV: a `year` column, then one column per trace.
///
/// Values use Rust's shortest round-trip formatting, so parsing the text
/// back yields the identical `f64`s. Lines end in `\n`.
pub fn format_run_csv(result: &RunResult) -> Result<String, DataError> {
    for (name, trace) in &result.traces {
        if trace.len() != result.times.len() {
            return Err(DataError::Misaligned(name.clone()));
        }
    }
    let mut out = String::from("year");
    for name in result.traces.keys() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, t) in result.times.iter().enumerate() {
        write!(out, "{t}").unwrap();
        for trace in result.traces.values() {
            write!(out, ",{}", trace[i]).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_run_csv(result: &RunResult, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let text = format_run_csv(result)?;
    fs::write(path, text).map_err(|e| DataError::io(path, e))
}

pub fn parse_run_csv(text: &str) -> Result<RunResult, DataError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(DataError::NoData)?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"year") {
        return Err(DataError::Malformed {
            line: 1,
            message: "first column must be `year`".into(),
        });
    }
    let mut traces: IndexMap<String, Vec<f64>> = cols[1..]
        .iter()
        .map(|c| (c.to_string(), Vec::new()))
        .collect();
    let mut times = Vec::new();
    for (i, row) in lines {
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(DataError::Malformed {
                line: i + 1,
                message: format!("expected {} fields, got {}", cols.len(), fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| DataError::Malformed {
                line: i + 1,
                message: format!("bad number `{s}`"),
            })
        };
        times.push(parse(fields[0])?);
        for (trace, f) in traces.values_mut().zip(&fields[1..]) {
            trace.push(parse(f)?);
        }
    }
    if times.is_empty() {
        return Err(DataError::NoData);
    }
    Ok(RunResult { times, traces })
}

pub fn read_run_csv(path: impl AsRef<Path>) -> Result<RunResult, DataError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    parse_run_csv(&text)
}
