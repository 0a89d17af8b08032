use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn legsphere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_legsphere"))
        .args(args)
        .env_remove("LEGSPHERE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

#[test]
fn export_plots_rows_match_formulas() {
    let out = legsphere(&["export-plots", "--eps", "0.1"]);
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(header, ["t", "q_n1", "slope"]);
    assert_eq!(rows.len(), 101);
    let eps = 0.1f64;
    for row in &rows {
        let v: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        let t = v[0];
        let e = (eps - 1.0) * t.abs() + 1.0;
        let a = (1.0 - t * t).sqrt();
        let b = (1.0 - e * e).sqrt();
        let q = if t >= 0.0 { a * b - t * e } else { -a * b - t * e };
        assert!((v[1] - q).abs() < 1e-12, "q at t={t}");
        assert!((v[2] - a / (e * a + t.abs() * b)).abs() < 1e-12, "slope at t={t}");
    }
    for (t, q, s) in [(1.0, -0.1, 0.0), (0.0, 0.0, 1.0), (-1.0, 0.1, 0.0)] {
        let row = rows.iter().find(|r| r[0].parse::<f64>().unwrap() == t).expect("anchor row present");
        assert!((row[1].parse::<f64>().unwrap() - q).abs() < 1e-12);
        assert!((row[2].parse::<f64>().unwrap() - s).abs() < 1e-12);
    }
}

#[test]
fn export_plots_json_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let out = legsphere(&["export-plots", "--format", "json", "--t-grid", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = read_json(&path);
    for key in ["n", "eps", "seed", "version"] {
        assert!(v["meta"].get(key).is_some(), "meta.{key}");
    }
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 5);
    for r in records {
        for key in ["t", "q_n1", "slope"] {
            assert!(r[key].is_f64(), "{key}");
        }
    }
}

#[test]
fn verify_all_passes_with_enough_checks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let out = legsphere(&["verify", "all", "--n", "2", "--eps", "0.1", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&path);
    let records = v["records"].as_array().unwrap();
    assert!(records.len() >= 20);
    assert!(records.iter().all(|r| r["pass"] == true));
    for key in ["check", "max_residual", "argmax", "samples", "excluded", "tol", "note"] {
        assert!(records[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn verify_isotopy_at_large_eps() {
    let out = legsphere(&["verify", "isotopy", "--n", "1", "--eps", "0.4", "--out", "-"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&legsphere(&["verify", "isotopy", "--eps", "0.9"])), 2);
    assert_eq!(code(&legsphere(&["verify", "isotopy", "--n", "5"])), 2);
    assert_eq!(code(&legsphere(&["verify", "isotopy", "--n", "0"])), 2);
    assert_eq!(code(&legsphere(&["verify", "nothing"])), 2);
    assert_eq!(code(&legsphere(&["verify", "jet", "--bogus"])), 2);
    assert_eq!(code(&legsphere(&["export-plots", "--format", "text"])), 2);
    assert_eq!(code(&legsphere(&["export-plots", "--t-grid", "1"])), 2);
    assert_eq!(code(&legsphere(&["verify", "jet", "--tol", "1e-30"])), 2);
    assert_eq!(code(&legsphere(&["openbook", "stabilize"])), 2);
    assert_eq!(code(&legsphere(&["openbook", "stabilize", "--label", "Q"])), 2);
    assert_eq!(code(&legsphere(&["openbook", "canonical", "--input", "not a descriptor"])), 2);
    assert_eq!(code(&legsphere(&[])), 2);
}

#[test]
fn check_failure_exits_1_and_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let out = legsphere(&["verify", "isotopy", "--n", "2", "--samples", "200", "--tol", "2e-9", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let v = read_json(&path);
    assert!(v["records"].as_array().unwrap().iter().any(|r| r["pass"] == false));
}

#[test]
fn io_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let target = blocker.join("out.csv");
    assert_eq!(code(&legsphere(&["export-plots", "--out", target.to_str().unwrap()])), 3);
    assert_eq!(code(&legsphere(&["export-front", "sstab", "--out", target.to_str().unwrap()])), 3);
}

#[test]
fn default_output_directory_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_legsphere"))
        .args(["export-plots", "--t-grid", "3"])
        .env("LEGSPHERE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("plots.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["verify", "jet", "--n", "2"],
        vec!["export-front", "lambda", "--n", "2", "--samples", "16"],
        vec!["export-front", "disk-family", "--n", "2", "--t-grid", "5", "--samples", "12", "--format", "csv"],
        vec!["export-plots"],
    ] {
        let mut files = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("run{k}"));
            let mut a = args.clone();
            a.extend(["--out", path.to_str().unwrap()]);
            assert_eq!(code(&legsphere(&a)), 0, "{args:?}");
            files.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(files[0], files[1], "{args:?}");
    }
}

#[test]
fn unknot_front_is_a_closed_two_cusp_loop() {
    let out = legsphere(&["export-front", "unknot", "--n", "1", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(header, ["t", "x1", "x2", "q1", "z", "cusp"]);
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    for k in [3, 4] {
        let (a, b): (f64, f64) = (first[k].parse().unwrap(), last[k].parse().unwrap());
        assert!((a - b).abs() < 1e-9);
    }
    // The closing sample repeats the first.
    let cusps = rows[..rows.len() - 1].iter().filter(|r| r[5] == "true").count();
    assert_eq!(cusps, 2);
}

#[test]
fn front_records_have_the_declared_fields() {
    for construction in ["unknot", "sjoin", "sstab", "lambda", "disk-family"] {
        let out = legsphere(&["export-front", construction, "--n", "2", "--samples", "8", "--t-grid", "3", "--out", "-"]);
        assert_eq!(code(&out), 0, "{construction}");
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let records = v["records"].as_array().unwrap();
        assert!(!records.is_empty());
        for r in records {
            for key in ["t", "x_params", "q", "z", "cusp"] {
                assert!(r.get(key).is_some(), "{construction}: {key}");
            }
        }
    }
}

#[test]
fn disk_family_slices_and_flat_stab_fronts() {
    let out = legsphere(&["export-front", "disk-family", "--n", "1", "--t-grid", "3", "--samples", "50", "--out", "-"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut ts: Vec<f64> = v["records"].as_array().unwrap().iter().map(|r| r["t"].as_f64().unwrap()).collect();
    ts.dedup();
    assert_eq!(ts, [-1.0, 0.0, 1.0]);

    let out = legsphere(&["export-front", "sstab", "--n", "2", "--samples", "16", "--out", "-"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let zs: Vec<f64> = v["records"].as_array().unwrap().iter().map(|r| r["z"].as_f64().unwrap()).collect();
    let (lo, hi) = zs.iter().fold((f64::MAX, f64::MIN), |(a, b), z| (a.min(*z), b.max(*z)));
    assert!(hi - lo < 1e-12);
}

#[test]
fn openbook_text_matches_golden_files() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden");
    let stabilize = std::fs::read_to_string(golden.join("stabilize.txt")).unwrap();
    let surgery = std::fs::read_to_string(golden.join("surgery.txt")).unwrap();
    for (n, (st, su)) in (1..=4).zip(stabilize.lines().zip(surgery.lines())) {
        let n = n.to_string();
        let out = legsphere(&["openbook", "stabilize", "--n", &n, "--label", "L", "--format", "text"]);
        assert_eq!(String::from_utf8(out.stdout).unwrap().trim_end(), st);
        let out = legsphere(&["openbook", "surgery", "--n", &n, "--fixture", "cotangent-sphere", "--label", "S", "--format", "text"]);
        assert_eq!(String::from_utf8(out.stdout).unwrap().trim_end(), su);
    }
}

#[test]
fn openbook_inverse_and_canonical() {
    let out = legsphere(&["openbook", "surgery", "--fixture", "cotangent-sphere", "--label", "S", "--format", "text"]);
    let twice = String::from_utf8(out.stdout).unwrap();
    let out = legsphere(&["openbook", "inverse", "--input", twice.trim_end(), "--label", "S", "--out", "-"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rec = &v["records"][0];
    assert_eq!(rec["op"], "inverse");
    assert!(rec["canonical"].as_str().unwrap().ends_with("word=[S+]"));
    let out = legsphere(&["openbook", "canonical", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("op,descriptor,canonical\n"));
}
