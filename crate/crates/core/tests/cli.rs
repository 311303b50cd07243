use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use scatterkit::io::{emit_plotdata, PlotKind};
use serde_json::{json, Value};

fn scatterkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scatterkit")).args(args).output().expect("binary runs")
}

/// Rank-one perturbation of a 64-site Laplacian with schedules sized for it.
fn small_config() -> Value {
    json!({
        "schema_version": 1,
        "model": { "kind": "path_laplacian", "dim": 64 },
        "perturbation": { "kind": "rank_k", "sites": [32], "strength": 0.2 },
        "window": [1.0, 3.0],
        "schedules": {
            "time": { "t_max": 100.0, "points": 10, "abel_rate": 0.1 },
            "epsilon": [0.19, 0.15, 0.12, 0.1]
        },
        "smoothness": { "eps_min": 0.2, "len_min": 0.4 }
    })
}

fn write_config(dir: &Path, cfg: &Value) -> String {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(cmd: &[&str], cfg: &Value) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), cfg);
    let out = dir.path().join("out");
    let mut args: Vec<&str> = cmd.to_vec();
    args.extend(["--config", &config, "--out", out.to_str().unwrap()]);
    (scatterkit(&args), dir)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_kr_on_unperturbed_pair_exits_zero() {
    let mut cfg = small_config();
    cfg["perturbation"] = json!({ "kind": "rank_k", "sites": [], "strength": 0.0 });
    let (o, dir) = run(&["verify-kr"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/kr_report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], json!(true));
    for check in report["report"]["checks"].as_array().unwrap() {
        assert!(check["value"].as_f64().unwrap() <= 1e-8, "{check}");
    }
    let trails = fs::read_to_string(dir.path().join("out/kr_trails.csv")).unwrap();
    assert!(trails.starts_with("sign,method,schedule_point,residual\n"));
}

#[test]
fn window_outside_band_exits_two() {
    let mut cfg = small_config();
    cfg["window"] = json!([1.0, 5.0]);
    let (o, _dir) = run(&["verify-kr"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("window outside spectral band"), "{}", stderr(&o));

    // Inside the band but within 5ε of its lower edge.
    cfg["window"] = json!([0.5, 3.0]);
    let (o, _dir) = run(&["verify-kr"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("away from the band edges"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_schema_versions_exit_two() {
    let mut cfg = small_config();
    cfg["colour"] = json!("blue");
    let (o, _dir) = run(&["spectrum"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));

    let mut cfg = small_config();
    cfg["schema_version"] = json!(99);
    let (o, _dir) = run(&["spectrum"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema_version"));

    let o = scatterkit(&["spectrum", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_checks_exit_one() {
    let mut cfg = small_config();
    cfg["tolerances"] = json!({ "residual": 1e-6 });
    let (o, _dir) = run(&["verify-kr"], &cfg);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("check failed"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verify-kr FAILED"));
}

#[test]
fn spectrum_of_four_sites_matches_closed_form() {
    let mut cfg = small_config();
    cfg["model"] = json!({ "kind": "path_laplacian", "dim": 4 });
    cfg["window"] = json!([0.5, 3.0]);
    cfg["perturbation"] = json!({ "kind": "rank_k", "sites": [], "strength": 0.0 });
    let (o, dir) = run(&["spectrum"], &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("out/spectrum_eigenvalues.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        let l: f64 = row[1].parse().unwrap();
        let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / 5.0).cos();
        assert!((l - exact).abs() < 1e-12);
    }
    assert!(!text.contains('\r'));
}

#[test]
fn single_point_schedule_writes_header_only_trail() {
    let mut cfg = small_config();
    cfg["schedules"]["time"] = json!({ "t_max": 50.0, "points": 1, "abel_rate": 0.1 });
    let (o, dir) = run(&["wave", "--method", "time", "--sign", "minus"], &cfg);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("out/wave_time_dependent_minus_trail.csv")).unwrap();
    assert_eq!(text, "t,residual\n");
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/wave_time_dependent_minus.json")).unwrap()).unwrap();
    assert_eq!(summary["report"]["w"]["dim"], json!(64));
}

#[test]
fn gamma_spread_series_has_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(PlotKind::GammaSpread.file_name());
    emit_plotdata(&path, PlotKind::GammaSpread, &[(64.0, 0.336), (128.0, 0.339), (256.0, 0.327)]).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text, "n,gamma_spread\n64.0,0.336\n128.0,0.339\n256.0,0.327\n");
}

#[test]
fn smoothness_and_acdiag_write_their_outputs() {
    let (o, _dir) = run(&["smoothness"], &small_config());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("under-resolved mesh"));

    let mut cfg = small_config();
    cfg["smoothness"]["eps_min"] = json!(0.3);
    let (o, dir) = run(&["smoothness", "--seed", "5", "--threads", "2"], &cfg);
    assert!(matches!(o.status.code(), Some(0) | Some(1)), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/smoothness.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["gamma"].as_array().unwrap().len(), 5);
    assert_eq!(report["report"]["params"]["seed"], json!(5));

    let (o, dir) = run(&["acdiag"], &small_config());
    assert!(matches!(o.status.code(), Some(0) | Some(1)), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("out/acdiag.csv")).unwrap();
    assert!(text.starts_with("lambda,cdf_norm,quotient\n"));
}

#[test]
fn bad_arguments_are_rejected_by_the_parser() {
    let o = scatterkit(&["wave", "--config", "x.json", "--method", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
    let o = scatterkit(&["teleport"]);
    assert_eq!(o.status.code(), Some(2));
}
