//! Command-line front end: run scenarios, compare them, calibrate.

pub mod findings;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Deserialize;

use pbr_sim::calibration::{self, CalibrationError, CalibrationSpec, FitResult};
use pbr_sim::data::{self, Chart, ChartSeries, DataBundle, DataError, Panel, TimeSeries};
use pbr_sim::engine::EngineError;
use pbr_sim::model::{build_scenario, parse_assignment, ModelError, ScenarioName};
use pbr_sim::{ModelInputs, PretermModel, RunResult, ScenarioSpec, SimConfig};

use findings::{compare_series, Findings, VariableFindings};

/// Variables written by `compare`.
pub const COMPARED: [&str; 4] = ["pbr", "resources_to_healthcare", "vul_pop", "total_pop"];

#[derive(Debug, Parser)]
#[command(
    name = "pbr-sim",
    version,
    about = "Preterm birth rate stock-and-flow simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario and write `<scenario>.csv` and `<scenario>.svg`.
    Run {
        #[arg(long, default_value = "base")]
        scenario: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Simulate several scenarios against the first one.
    Compare {
        #[arg(required = true, num_args = 2..)]
        scenarios: Vec<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Fit free parameters to the historical series.
    Calibrate {
        /// Calibration spec JSON (free parameters, weights, termination).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// JSON with optional `sim` settings and parameter `overrides`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory with pbr.csv, population.csv and poverty.csv.
    #[arg(long, env = "SD_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub end: Option<f64>,
    /// Parameter or switch override, `name=value`. Repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    sim: Option<SimConfig>,
    #[serde(default)]
    overrides: BTreeMap<String, f64>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Simulation(String),
    Optimizer(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Simulation(_) => 2,
            CliError::Optimizer(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Simulation(m) | CliError::Optimizer(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::ZeroBirths | ModelError::Engine(EngineError::NonFinite { .. }) => {
                CliError::Simulation(format!("simulation aborted: {e}"))
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        match e {
            CalibrationError::Model(m) => m.into(),
            CalibrationError::AllNonFinite => CliError::Optimizer(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Run { scenario, common } => cmd_run(scenario, common).map(|_| ()),
        Command::Compare { scenarios, common } => cmd_compare(scenarios, common).map(|_| ()),
        Command::Calibrate { spec, common } => cmd_calibrate(spec.as_deref(), common).map(|_| ()),
    }
}

struct Setup {
    sim: SimConfig,
    overrides: Vec<(String, f64)>,
    data: Option<DataBundle>,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn setup(common: &CommonArgs, default_sim: SimConfig) -> Result<Setup, CliError> {
    let config: ConfigFile = match &common.config {
        Some(path) => serde_json::from_str(&read_text(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => ConfigFile::default(),
    };
    let mut sim = config.sim.unwrap_or(default_sim);
    if let Some(dt) = common.dt {
        sim.dt = dt;
    }
    if let Some(start) = common.start {
        sim.start_time = start;
    }
    if let Some(end) = common.end {
        sim.end_time = end;
    }
    sim.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut overrides: Vec<(String, f64)> = config.overrides.into_iter().collect();
    for s in &common.set {
        overrides.push(parse_assignment(s)?);
    }
    let data = match &common.data_dir {
        Some(dir) => Some(DataBundle::load(dir)?),
        None => None,
    };
    Ok(Setup {
        sim,
        overrides,
        data,
    })
}

fn scenario_inputs(name: &str, overrides: &[(String, f64)]) -> Result<ModelInputs, CliError> {
    let name: ScenarioName = name.parse()?;
    let mut spec = ScenarioSpec::new(name);
    for (k, v) in overrides {
        spec = spec.with_override(k.clone(), *v);
    }
    Ok(build_scenario(&ModelInputs::default(), &spec)?)
}

fn simulate(inputs: ModelInputs, sim: &SimConfig) -> Result<RunResult, CliError> {
    Ok(PretermModel::new(inputs)?.simulate(sim)?)
}

fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))
}

fn trace_points(run: &RunResult, name: &str) -> Vec<(f64, f64)> {
    run.series(name).map(|s| s.collect()).unwrap_or_default()
}

fn history_points(series: &TimeSeries) -> Vec<(f64, f64)> {
    series
        .points()
        .iter()
        .map(|&(y, v)| (y as f64, v))
        .collect()
}

/// PBR panel over a population panel, with any historical series dashed.
pub fn run_chart(title: &str, run: &RunResult, data: Option<&DataBundle>) -> Chart {
    let mut pbr = Panel {
        title: "Preterm birth rate".into(),
        y_label: "% of births".into(),
        series: vec![ChartSeries::simulated(
            "simulated pbr",
            trace_points(run, "pbr"),
        )],
    };
    let mut pop = Panel {
        title: "Population".into(),
        y_label: "people".into(),
        series: vec![
            ChartSeries::simulated("total_pop", trace_points(run, "total_pop")),
            ChartSeries::simulated("vul_pop", trace_points(run, "vul_pop")),
        ],
    };
    if let Some(d) = data {
        pbr.series.push(ChartSeries::historical(
            "historical pbr",
            history_points(&d.pbr_history),
        ));
        pop.series.push(ChartSeries::historical(
            "historical total",
            history_points(&d.total_population),
        ));
        pop.series.push(ChartSeries::historical(
            "historical vulnerable",
            history_points(&d.vulnerable_population()),
        ));
    }
    Chart {
        title: title.to_string(),
        panels: vec![pbr, pop],
    }
}

fn write_outputs(
    out_dir: &Path,
    stem: &str,
    run: &RunResult,
    chart: &Chart,
) -> Result<(), CliError> {
    data::write_run_csv(run, out_dir.join(format!("{stem}.csv")))?;
    data::write_svg(chart, out_dir.join(format!("{stem}.svg")))?;
    Ok(())
}

pub fn cmd_run(scenario: &str, common: &CommonArgs) -> Result<RunResult, CliError> {
    let setup = setup(common, SimConfig::default())?;
    let inputs = scenario_inputs(scenario, &setup.overrides)?;
    let run = simulate(inputs, &setup.sim)?;
    prepare_out_dir(&common.out_dir)?;
    let stem = scenario.to_ascii_lowercase();
    let chart = run_chart(&format!("Scenario {stem}"), &run, setup.data.as_ref());
    write_outputs(&common.out_dir, &stem, &run, &chart)?;
    info!(
        "wrote {stem}.csv and {stem}.svg to {}",
        common.out_dir.display()
    );
    Ok(run)
}

/// Column labels, with repeats disambiguated by position.
fn labels(scenarios: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(scenarios.len());
    for s in scenarios {
        let base = s.to_ascii_lowercase();
        let mut label = base.clone();
        let mut n = 2;
        while out.contains(&label) {
            label = format!("{base}_{n}");
            n += 1;
        }
        out.push(label);
    }
    out
}

pub fn cmd_compare(scenarios: &[String], common: &CommonArgs) -> Result<Findings, CliError> {
    if scenarios.len() < 2 {
        return Err(CliError::Config(
            "compare needs at least two scenarios".into(),
        ));
    }
    let setup = setup(common, SimConfig::default())?;
    let inputs = scenarios
        .iter()
        .map(|s| scenario_inputs(s, &setup.overrides))
        .collect::<Result<Vec<_>, _>>()?;
    let runs: Vec<Result<RunResult, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .into_iter()
            .map(|i| scope.spawn(|| simulate(i, &setup.sim)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let labels = labels(scenarios);
    let reference = &runs[0];
    let times = reference.times.clone();

    prepare_out_dir(&common.out_dir)?;
    let mut variables = Vec::with_capacity(COMPARED.len());
    for var in COMPARED {
        let mut table = RunResult {
            times: times.clone(),
            traces: Default::default(),
        };
        let mut panel = Panel {
            title: var.to_string(),
            y_label: var.to_string(),
            series: Vec::new(),
        };
        for (label, run) in labels.iter().zip(&runs) {
            let values = run.get(var).unwrap_or_default().to_vec();
            panel.series.push(ChartSeries::simulated(
                label.clone(),
                times.iter().copied().zip(values.iter().copied()),
            ));
            table.traces.insert(label.clone(), values);
        }
        if let (Some(d), "pbr" | "total_pop" | "vul_pop") = (setup.data.as_ref(), var) {
            let hist = match var {
                "pbr" => d.pbr_history.clone(),
                "total_pop" => d.total_population.clone(),
                _ => d.vulnerable_population(),
            };
            panel
                .series
                .push(ChartSeries::historical("historical", history_points(&hist)));
        }
        let chart = Chart {
            title: format!("{var}: {}", labels.join(" vs ")),
            panels: vec![panel],
        };
        write_outputs(&common.out_dir, &format!("compare_{var}"), &table, &chart)?;

        let base_values = reference.get(var).unwrap_or_default();
        variables.push(VariableFindings {
            variable: var.to_string(),
            scenarios: labels
                .iter()
                .zip(&runs)
                .skip(1)
                .map(|(label, run)| {
                    compare_series(label, &times, base_values, run.get(var).unwrap_or_default())
                })
                .collect(),
        });
    }
    let findings = Findings {
        reference: labels[0].clone(),
        variables,
    };
    let json = serde_json::to_string_pretty(&findings).expect("findings serialize");
    let path = common.out_dir.join("findings.json");
    fs::write(&path, json + "\n")
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for v in &findings.variables {
        for s in &v.scenarios {
            let years: Vec<String> = s.crossings.iter().map(|c| c.year.to_string()).collect();
            println!(
                "{} {} vs {}: crossings [{}], max |delta| {}",
                v.variable,
                s.scenario,
                findings.reference,
                years.join(", "),
                s.max_abs_delta
            );
        }
    }
    Ok(findings)
}

pub fn cmd_calibrate(spec_path: Option<&Path>, common: &CommonArgs) -> Result<FitResult, CliError> {
    let mut spec = match spec_path {
        Some(p) => CalibrationSpec::from_json(&read_text(p)?)?,
        None => CalibrationSpec::default(),
    };
    if spec.free.is_empty() {
        return Err(CalibrationError::EmptyFreeSet.into());
    }
    let setup = setup(common, SimConfig::default())?;
    if let Some(dt) = common.dt {
        spec.sim.dt = dt;
    }
    let data = setup
        .data
        .ok_or_else(|| CliError::Config("calibrate needs --data-dir or SD_DATA_DIR".into()))?;
    data.check_coverage(spec.sim.start_time as i32, spec.sim.end_time as i32)?;
    let base = scenario_inputs("base", &setup.overrides)?;

    let fit = calibration::fit(&base, &data, &spec)?;
    if !fit.objective.is_finite() {
        return Err(CliError::Optimizer(
            "no finite objective value found".into(),
        ));
    }
    let run = simulate(fit.apply(&base)?, &setup.sim)?;

    prepare_out_dir(&common.out_dir)?;
    let json = serde_json::to_string_pretty(&fit).expect("fit result serialize");
    let path = common.out_dir.join("fit.json");
    fs::write(&path, json + "\n")
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let chart = run_chart("Calibrated run", &run, Some(&data));
    write_outputs(&common.out_dir, "calibrated", &run, &chart)?;

    println!(
        "objective {} (initial {}), {} evaluations{}",
        fit.objective,
        fit.initial_objective,
        fit.evaluations,
        if fit.converged { "" } else { ", not converged" }
    );
    for (name, value) in &fit.values {
        println!("  {name} = {value}");
    }
    for (series, m) in &fit.per_series {
        println!("  MAPE {series}: {:.3}% (rmse {})", m.mape, m.rmse);
    }
    Ok(fit)
}
