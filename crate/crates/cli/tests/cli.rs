use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rnmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnmod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_a_report() {
    let out = tempfile::tempdir().unwrap();
    let report = out.path().join("halving.json");
    let scenario = corpus().join("02-halving-ball.toml");
    let status = rnmod(&["run", arg(&scenario), "--report", arg(&report), "--seed", "3"]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = fs::read_to_string(&report).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["verdict"], "pass");
    assert_eq!(json["provenance"]["seed"], 3);
    assert_eq!(json["provenance"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn run_prints_csv_and_honours_horizon() {
    let scenario = corpus().join("06-eventually-contractive.toml");
    let output = rnmod(&["run", arg(&scenario), "--format", "csv", "--horizon", "12"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("certificate.horizon,12\n"));
    assert!(text.contains("verdict,pass\n"));
}

#[test]
fn vacuous_scenario_exits_cleanly() {
    let scenario = corpus().join("12-prescribed-not-fixed.toml");
    let output = rnmod(&["run", arg(&scenario)]);
    assert!(output.status.success());
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(json["verdict"], "hypotheses-not-met");
    assert_eq!(json["hypothesis_residual"]["holds"], false);
}

#[test]
fn empty_suite_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let reports = dir.path().join("out");
    let output = rnmod(&["suite", arg(dir.path()), "--report", arg(&reports)]);
    assert!(output.status.success());
    let summary = fs::read_to_string(reports.join("summary.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 0);
}

#[test]
fn malformed_file_fails_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(corpus().join("01-identity-ball.toml"), dir.path().join("good.toml")).unwrap();
    fs::write(dir.path().join("bad.toml"), "name = \"broken\"\n[space]\nweights = \"many\"\n").unwrap();
    let reports = dir.path().join("out");
    let output = rnmod(&["suite", arg(dir.path()), "--report", arg(&reports), "--format", "csv"]);
    assert!(!output.status.success());
    let summary = fs::read_to_string(reports.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("name,hypotheses,conclusion_residual,verdict,wall_time_ms"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("bad,,,error,"));
    assert!(rows[1].starts_with("identity-ball,met,0e0,pass,"));
    assert!(reports.join("good.csv").exists());
}

#[test]
fn single_passing_scenario() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(corpus().join("04-rotation-ball.toml"), dir.path().join("rotation.toml")).unwrap();
    let reports = dir.path().join("out");
    let output = rnmod(&["suite", arg(dir.path()), "--report", arg(&reports)]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.contains("rotation-ball,met,0e0,pass,"));
}

#[test]
fn suite_reports_are_reproducible() {
    let out = tempfile::tempdir().unwrap();
    let (a, b) = (out.path().join("a"), out.path().join("b"));
    for dir in [&a, &b] {
        let output = rnmod(&["suite", arg(&corpus()), "--report", arg(dir), "--seed", "99"]);
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    }
    let mut compared = 0;
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "summary.json" {
            continue;
        }
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
        compared += 1;
    }
    assert!(compared >= 12);
}

#[test]
fn selftest_passes() {
    let output = rnmod(&["selftest", "--scale", "40"]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn missing_scenario_is_an_error() {
    let output = rnmod(&["run", "/nonexistent/scenario.toml"]);
    assert_eq!(output.status.code(), Some(2));
}
