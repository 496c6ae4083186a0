use pbr_sim::data::{
    format_run_csv, load_series, read_run_csv, render_svg, write_run_csv, Chart, ChartSeries,
    DataBundle, DataError, Panel,
};
use pbr_sim::{ModelInputs, PretermModel, SimConfig};
use std::fs;

#[test]
fn base_run_csv_has_28_rows_and_round_trips() {
    let run = PretermModel::new(ModelInputs::default())
        .unwrap()
        .simulate(&SimConfig::default())
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("base.csv");
    write_run_csv(&run, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 29);
    assert!(text.starts_with("year,lal_pop,vul_pop,total_pop,"));
    assert!(!text.contains('\r'));
    let back = read_run_csv(&path).unwrap();
    assert_eq!(back, run);
    assert_eq!(format_run_csv(&back).unwrap(), text);
}

#[test]
fn bundle_loads_from_directory() {
    let dir = tempfile::tempdir().unwrap();
    let years = 1995..=2017;
    let write = |name: &str, f: &dyn Fn(i32) -> f64| {
        let mut s = String::from("year,value\n");
        for y in years.clone() {
            s.push_str(&format!("{y},{}\n", f(y)));
        }
        fs::write(dir.path().join(name), s).unwrap();
    };
    write("pbr.csv", &|y| 12.0 + (y - 1995) as f64 * 0.1);
    write("population.csv", &|y| 1.4e6 - (y - 1995) as f64 * 5000.0);
    write("poverty.csv", &|_| 200000.0);
    let bundle = DataBundle::load(dir.path()).unwrap();
    assert!(bundle.crime_rate.is_none());
    bundle.check_coverage(1995, 2017).unwrap();
    assert_eq!(bundle.vulnerable_population().get(2000), Some(400000.0));
    assert!(bundle.check_coverage(1990, 2017).is_err());
}

#[test]
fn missing_file_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let err = DataBundle::load(dir.path()).unwrap_err();
    assert!(matches!(err, DataError::Io { .. }));
    assert!(err.to_string().contains("pbr.csv"), "{err}");
}

#[test]
fn load_series_examples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    fs::write(&path, "year,value\n1995,11.21\n").unwrap();
    assert_eq!(
        load_series(&path, "ohio").unwrap().points(),
        &[(1995, 11.21)]
    );
    fs::write(&path, "").unwrap();
    assert!(load_series(&path, "x")
        .unwrap_err()
        .to_string()
        .contains("no data rows"));
    fs::write(&path, "year,value\n1995,1\n1997,1\n1996,1\n").unwrap();
    assert!(load_series(&path, "x")
        .unwrap_err()
        .to_string()
        .contains("years not increasing"));
}

#[test]
fn comparison_chart_has_one_polyline_per_series() {
    let chart = Chart {
        title: "pbr".into(),
        panels: vec![Panel {
            title: "PBR".into(),
            y_label: "%".into(),
            series: vec![
                ChartSeries::simulated("base", [(1995.0, 13.0), (2022.0, 17.0)]),
                ChartSeries::simulated("s2", [(1995.0, 13.0), (2022.0, 18.0)]),
            ],
        }],
    };
    let svg = render_svg(&chart);
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains(r#"viewBox="0 0 960 540""#));
}
