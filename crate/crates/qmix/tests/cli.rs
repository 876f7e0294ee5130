use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmix"))
        .args(args)
        .output()
        .expect("qmix runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stderr_json(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stderr)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("stderr line is not JSON: {l:?} ({e})")))
        .collect()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const DEP4: &str = r#"{"family": "depolarizing", "dim": 4, "gamma": 1.0}"#;

#[test]
fn analyze_depolarizing_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dep.json", DEP4);
    let report = dir.path().join("report.json");
    let out = qmix(&["analyze", spec.to_str().unwrap(), "--seed", "7", "--budget", "8", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!((r["gap"]["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((r["sigma_min"].as_f64().unwrap() - 0.25).abs() < 1e-14);
    let a2 = r["ls"]["alpha2"]["alpha_estimate"].as_f64().unwrap();
    let exact = 2.0 * (1.0 - 2.0 / 4.0) / (3.0f64).ln();
    assert!((a2 - exact).abs() / exact < 1e-3, "alpha2 {a2} vs {exact}");
    assert_eq!(r["verdicts"]["all_ok"], Value::Bool(true), "{}", r["verdicts"]);
    assert_eq!(r["provenance"]["seed"], 7);
    assert!(r["regularity"].is_object());
}

#[test]
fn skipped_sections_are_listed_as_missing() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dep.json", DEP4);
    let out = qmix(&["analyze", spec.to_str().unwrap(), "--seed", "1", "--skip", "alpha1,regularity"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert!(r["ls"]["alpha1"].is_null());
    assert!(r["ls"]["alpha2"].is_object());
    assert_eq!(r["missing"]["alpha1"], "skipped");
    assert_eq!(r["missing"]["regularity"], "skipped");
    assert!(r["missing"]["verdicts"].is_string());
}

#[test]
fn same_seed_gives_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "ru.json",
        r#"{"family": "random_unitary", "dim": 3, "D": 2, "seed": 11, "reversible": true}"#,
    );
    let run = || {
        let out = qmix(&["analyze", spec.to_str().unwrap(), "--seed", "99", "--budget", "4", "--probes", "3"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let mut r = stdout_json(&out);
        r["provenance"]["wall_time"] = Value::Null;
        r
    };
    assert_eq!(run(), run());
}

#[test]
fn omitted_seed_is_logged() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dep.json", r#"{"family": "depolarizing", "dim": 2}"#);
    let out = qmix(&["analyze", spec.to_str().unwrap(), "--budget", "2", "--skip", "regularity"]);
    assert_eq!(out.status.code(), Some(0));
    let logs = stderr_json(&out);
    let ev = logs.iter().find(|v| v["event"] == "seed_selected").expect("seed event");
    assert_eq!(ev["seed"], stdout_json(&out)["provenance"]["seed"]);
}

#[test]
fn non_primitive_spec_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "ham.json",
        r#"{"family": "generic", "hamiltonian": [[[1,0],[0,0]],[[0,0],[-1,0]]], "lindblad_ops": []}"#,
    );
    let out = qmix(&["analyze", spec.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let errs = stderr_json(&out);
    assert_eq!(errs.len(), 1);
    assert_eq!(errs[0]["error"], "not_primitive");
    assert_eq!(errs[0]["exit_code"], 2);
    assert!(out.stdout.is_empty());
}

#[test]
fn identity_channel_is_not_primitive() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "id.json", r#"{"family": "channel", "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#);
    let out = qmix(&["mixing", spec.to_str().unwrap(), "--out", dir.path().join("c.csv").to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_field_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.json", "{\"family\": \"depolarizing\",\n  \"dimm\": 4}");
    let out = qmix(&["analyze", spec.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let e = &stderr_json(&out)[0];
    assert_eq!(e["error"], "malformed_spec");
    assert_eq!(e["field"], "dimm");
    assert_eq!(e["line"], 2);
    assert_eq!(e["column"], 3);
}

#[test]
fn syntax_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.json", "{\"family\": \"depolarizing\",\n\"dim\": 4,,}");
    let out = qmix(&["analyze", spec.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let e = &stderr_json(&out)[0];
    assert_eq!(e["line"], 2);
    assert!(e["column"].as_u64().unwrap() > 0);
}

#[test]
fn ragged_matrix_names_its_field() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.json", r#"{"family": "projection", "sigma": [[[1,0]],[[0,0],[1,0]]]}"#);
    let out = qmix(&["analyze", spec.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)[0]["field"], "sigma");
}

#[test]
fn missing_file_and_bad_flags_exit_1() {
    let out = qmix(&["analyze", "/nonexistent/spec.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)[0]["error"], "io");

    let out = qmix(&["analyze", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)[0]["error"], "usage");

    let out = qmix(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn mixing_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dep.json", DEP4);
    let csv = dir.path().join("curve.csv");
    let out = qmix(&[
        "mixing", spec.to_str().unwrap(), "--out", csv.to_str().unwrap(), "--seed", "3", "--states", "10",
        "--budget", "4", "--grid-n", "21", "--t-max", "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_json(&out);
    assert_eq!(summary["dominated"], Value::Bool(true));
    let tau = summary["tau_mix"].as_f64().unwrap();
    let chi2 = summary["chi2_crossing"].as_f64().unwrap();
    assert!(tau > 0.0 && tau <= chi2 + 1e-9, "tau {tau} chi2 {chi2}");

    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header.join(","), "t,trace_dist,chi2,rel_ent,chi2_bound,ls_bound_a1,ls_bound_a2");
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 21);
    for row in &rows {
        let dist: f64 = row[1].parse().unwrap();
        for col in 4..=6 {
            if !row[col].is_empty() {
                assert!(dist <= row[col].parse::<f64>().unwrap() + 1e-7);
            }
        }
    }
    assert_eq!(rows[20][0].parse::<f64>().unwrap(), 4.0);
}

#[test]
fn mixing_json_form_and_trivial_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dep.json", r#"{"family": "depolarizing", "dim": 2}"#);
    let js = dir.path().join("curve.json");
    let out = qmix(&[
        "mixing", spec.to_str().unwrap(), "--out", js.to_str().unwrap(), "--seed", "3", "--states", "4",
        "--budget", "2", "--grid-n", "11", "--epsilon", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["tau_mix"].as_f64(), Some(0.0));
    let curve: Value = serde_json::from_str(&std::fs::read_to_string(&js).unwrap()).unwrap();
    assert_eq!(curve["times"].as_array().map(Vec::len), Some(11));
}

#[test]
fn mixing_rejects_nonpositive_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "dep.json", DEP4);
    let out = qmix(&["mixing", spec.to_str().unwrap(), "--out", "/dev/null", "--epsilon", "0", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)[0]["field"], "epsilon");
}

#[test]
fn reproduce_depolarizing_table_passes() {
    let out = qmix(&["reproduce", "depolarizing-table", "--seed", "1", "--budget", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = stdout_json(&out);
    assert_eq!(r["pass"], Value::Bool(true));
    assert_eq!(r["checks"].as_array().unwrap().len(), 14);
}

#[test]
fn reproduce_davies_qubit_passes() {
    let out = qmix(&["reproduce", "davies-qubit", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

fn read_lines(p: &Path) -> Vec<Value> {
    std::fs::read_to_string(p)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn scan(out: &Path, n: u64, extra: &[&str]) -> Output {
    let n = n.to_string();
    let mut args = vec!["scan", "--out", out.to_str().unwrap(), "--n", &n, "--probes", "3"];
    args.extend_from_slice(extra);
    qmix(&args)
}

#[test]
fn scan_resumes_from_line_count() {
    let dir = tempfile::tempdir().unwrap();
    let once = dir.path().join("once.jsonl");
    let split = dir.path().join("split.jsonl");

    let a = scan(&once, 6, &["--seed", "21"]);
    assert!(matches!(a.status.code(), Some(0 | 3)));

    scan(&split, 2, &["--seed", "21"]);
    // resume without --seed: the seed recorded in the file is reused
    let b = scan(&split, 6, &[]);
    let summary = stdout_json(&b);
    assert_eq!(summary["resumed_from"], 2);
    assert_eq!(summary["written"], 4);
    assert_eq!(summary["seed"], 21);

    let lines = read_lines(&split);
    assert_eq!(lines.len(), 6);
    for (k, l) in lines.iter().enumerate() {
        assert_eq!(l["index"], k as u64);
        assert_eq!(l["seed"], 21);
    }
    assert_eq!(std::fs::read_to_string(&once).unwrap(), std::fs::read_to_string(&split).unwrap());
}

#[test]
fn scan_drops_partial_tail() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.jsonl");
    scan(&path, 3, &["--seed", "4"]);
    let full = std::fs::read_to_string(&path).unwrap();
    let cut = full.len() - 40;
    std::fs::write(&path, &full[..cut]).unwrap();

    let out = scan(&path, 3, &[]);
    assert_eq!(stdout_json(&out)["resumed_from"], 2);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), full);
}

#[test]
fn scan_rejects_conflicting_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.jsonl");
    scan(&path, 1, &["--seed", "4"]);
    let out = scan(&path, 2, &["--seed", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)[0]["field"], "seed");
}

#[test]
fn scan_output_does_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.jsonl");
    let three = dir.path().join("three.jsonl");
    scan(&one, 7, &["--seed", "8", "--jobs", "1"]);
    scan(&three, 7, &["--seed", "8", "--jobs", "3"]);
    assert_eq!(std::fs::read_to_string(&one).unwrap(), std::fs::read_to_string(&three).unwrap());
}

#[test]
fn violations_carry_reproduction_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.jsonl");
    scan(&path, 6, &["--seed", "5", "--dims", "2", "--kinds", "generic,reversible"]);
    let lines = read_lines(&path);
    let kinds: Vec<&str> = lines.iter().map(|l| l["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["generic", "reversible"].repeat(3));
    for l in &lines {
        assert_eq!(l["dim"], 2);
        let flagged = l["weak_violation"] == Value::Bool(true) || l["strong_violation"] == Value::Bool(true);
        assert_eq!(flagged, l["reproduction"].is_object(), "{l}");
        if flagged {
            assert!(!l["reproduction"]["lindblad_ops"].as_array().unwrap().is_empty());
        }
    }
    assert!(lines.iter().any(|l| l["reproduction"].is_object()));
}

#[test]
fn scan_rejects_unknown_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = scan(&dir.path().join("s.jsonl"), 1, &["--kinds", "chaotic", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
}
