use std::process::{Command, Output};

use serde_json::Value;

fn hypcount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypcount"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

#[test]
fn count_orbit_on_the_cyclic_group() {
    let out = hypcount(&[
        "count-orbit",
        "--group",
        "cyclic-demo",
        "--t-min",
        "5",
        "--t-max",
        "5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&out);
    assert_eq!(r["series"][0]["series"]["n"], serde_json::json!([5]));
    assert_eq!(r["status"], "pass");
}

#[test]
fn output_prefix_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("orbit");
    let prefix = prefix.to_str().unwrap();
    let out = hypcount(&[
        "count-orbit",
        "--t-min",
        "2",
        "--t-max",
        "8",
        "--output",
        prefix,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(format!("{prefix}.csv")).unwrap();
    assert!(csv.starts_with("T,N,complete\n"));
    assert_eq!(csv.lines().count(), 14);
    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{prefix}.json")).unwrap()).unwrap();
    assert_eq!(json["experiment"], "count-orbit");

    // The CSV feeds straight back into a fit.
    let csv_path = format!("{prefix}.csv");
    let out = hypcount(&["fit-growth", "--series", &csv_path, "--expected-slope", "1"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let slope = report(&out)["fits"][0]["fit"]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.15);
}

#[test]
fn synthetic_fit_recovers_the_rate() {
    let out = hypcount(&["fit-growth", "--synthetic", "3,0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let fit = &report(&out)["fits"][0]["fit"];
    assert!((fit["slope"].as_f64().unwrap() - 0.5).abs() < 0.02);
    assert!((fit["sigma_hat"].as_f64().unwrap() - 3.0).abs() < 0.1);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"experiment": "count-orbit", "group": "cyclic-demo", "t_min": 1, "t_max": 5}"#,
    )
    .unwrap();
    let path = path.to_str().unwrap();
    let out = hypcount(&["--config", path, "run"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        report(&out)["series"][0]["series"]["n"]
            .as_array()
            .unwrap()
            .len(),
        9
    );
    let out = hypcount(&["--config", path, "count-orbit", "--t-min", "5"]);
    assert_eq!(
        report(&out)["series"][0]["series"]["n"],
        serde_json::json!([5])
    );
}

#[test]
fn exit_codes() {
    assert_eq!(hypcount(&["check", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(
        hypcount(&["count-orbit", "--x", "0,-1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        hypcount(&["count-orbit", "--group", "missing.json"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"experiment": "count-orbit", "tmax": 3}"#).unwrap();
    assert_eq!(
        hypcount(&["--config", bad.to_str().unwrap(), "run"])
            .status
            .code(),
        Some(2)
    );
    // Too short a word cap for the radius.
    let out = hypcount(&[
        "count-orbit",
        "--t-min",
        "4",
        "--t-max",
        "9",
        "--word-cap",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("incomplete"));
    // A fit far from the expected rate.
    assert_eq!(
        hypcount(&[
            "fit-growth",
            "--synthetic",
            "3,0.5",
            "--expected-slope",
            "1"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        hypcount(&["check", "busemann", "--samples", "100", "--quiet"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn worker_count_does_not_change_the_report() {
    let args = [
        "ratio-test",
        "--t-min",
        "4",
        "--t-max",
        "6",
        "--n-nodes",
        "32",
    ];
    let strip = |mut v: Value| {
        v["wall_clock_seconds"] = Value::Null;
        v
    };
    let one = Command::new(env!("CARGO_BIN_EXE_hypcount"))
        .args(args)
        .env("HYPCOUNT_WORKERS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_hypcount"))
        .args(args)
        .env("HYPCOUNT_WORKERS", "4")
        .output()
        .unwrap();
    assert_eq!(one.status.code(), many.status.code());
    assert_eq!(strip(report(&one)), strip(report(&many)));
}
