use std::fs;
use std::process::{Command, Output};

fn mmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn radial_law_writes_csv_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("radial.csv");
    let out = mmlab(&[
        "radial-law", "--beta", "3", "--dims", "2,8,32", "--samples", "2000", "--seed", "7",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,ks_empirical,ks_exact,ks_sampler,ks_critical"));
    assert_eq!(lines.count(), 3);
    assert!(stderr(&out).contains("PASS exact_gap_strictly_decreasing"));
}

#[test]
fn json_report_mirrors_rows_and_verdicts() {
    let out = mmlab(&[
        "muckenhoupt", "--beta", "1", "--dims", "2,4,8,16", "--samples", "100", "--seed", "1", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["columns"][0], "x");
    assert_eq!(v["config"]["seed"], 1);
    assert!(v["verdicts"].as_array().unwrap().iter().all(|x| x["passed"] == true));
    assert!(v["provenance"]["generator"].is_string());
}

#[test]
fn same_seed_same_bytes() {
    let args = ["near-radiality", "--beta", "1", "--dims", "4,16", "--samples", "3000", "--seed", "11"];
    let (a, b) = (mmlab(&args), mmlab(&args));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn failed_verdict_exits_with_two() {
    // no defect fraction can fall below a threshold this small
    let out = mmlab(&[
        "near-radiality", "--beta", "1", "--dims", "4,16", "--samples", "3000", "--seed", "1", "--eps", "0.001",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("FAIL defect_fraction_below_eps_at_top_n"));
    assert!(!stdout(&out).is_empty());
}

#[test]
fn invalid_configuration_exits_with_one() {
    let out = mmlab(&["radial-law", "--beta", "1", "--dims", "8,4", "--samples", "1000", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:"));
    let out = mmlab(&["radial-law", "--beta", "1", "--dims", "8", "--samples", "10", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sample_writes_binary_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("batch.bin");
    let out = mmlab(&[
        "sample", "--n", "3", "--beta", "2", "--rows", "10", "--seed", "5", "--normalized",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let bytes = fs::read(&path).unwrap();
    assert_eq!(bytes.len(), 3 * 10 * 8);
    let sidecar = dir.path().join("batch.bin.json");
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(sidecar).unwrap()).unwrap();
    assert_eq!(meta["N"], 10);
    assert_eq!(meta["n"], 3);
    assert_eq!(meta["seed"], 5);
    let first = f64::from_le_bytes(bytes[..8].try_into().unwrap());
    assert!(first.is_finite());
}

#[test]
fn radial_density_and_curvature_tables() {
    let out = mmlab(&["radial-density", "--n", "4", "--beta", "1", "--t", "0.5,1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("n,beta,t,density_n,density_limit\n"));
    assert_eq!(text.lines().count(), 4);

    let out = mmlab(&["curvature-asymptotics", "--beta", "1", "--dims", "4,16"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(row[0], 4.0);
    assert!((row[3] - 4.0 * 5.0 / 25.0).abs() < 1e-15);
    assert!((row[4] - 4.0).abs() < 1e-15);
}

#[test]
fn invariants_and_cone_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let space = dir.path().join("space.json");
    fs::write(
        &space,
        r#"{"n": 3, "dist": [[0, 1, 2], [1, 0, 1], [2, 1, 0]], "weights": [0.25, 0.5, 0.25]}"#,
    )
    .unwrap();
    let nu = dir.path().join("nu.json");
    fs::write(&nu, "[0.5, 0.25, 0.25]").unwrap();
    let out = mmlab(&[
        "invariants", "--space", space.to_str().unwrap(), "--alpha", "0.5,1", "--kappa", "0.5",
        "--nu", nu.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows[0]["value"], 2.0);
    assert_eq!(rows[1]["value"], 0.0);
    assert_eq!(rows[2]["value"], 2.0);
    assert_eq!(rows.last().unwrap()["invariant"], "prokhorov");
    assert_eq!(rows.last().unwrap()["value"], 0.25);

    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"kappa": 0, "radial": [[1, 0.5], [2, 0.5]]}"#).unwrap();
    let out = mmlab(&["cone", "--spec", spec.to_str().unwrap(), "--base", space.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let cone: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cone["n"], 6);

    let out = mmlab(&["invariants", "--space", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
