// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn verigate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verigate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["synth", s(&path)];
    args.extend_from_slice(extra);
    let out = verigate(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

#[test]
fn validate_accepts_fixtures() {
    for name in ["small.jsonl", "small_dev.jsonl", "answers_only.jsonl"] {
        let out = verigate(&["validate", s(&fixture(name))]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        assert!(stdout(&out).contains(": ok:"));
    }
}

#[test]
fn corrupted_fixtures_report_their_line() {
    let cases = [
        ("bad_malformed_line7.jsonl", "line 7:"),
        ("bad_rowsum_line50.jsonl", "line 50:"),
        ("bad_dangling_line60.jsonl", "line 60:"),
        ("bad_schema_line3.jsonl", "line 3:"),
        ("bad_duplicate_line12.jsonl", "line 12:"),
        ("bad_empty.jsonl", "no records"),
    ];
    for (name, needle) in cases {
        let out = verigate(&["validate", s(&fixture(name))]);
        assert_eq!(code(&out), 2, "{name}");
        let err = stderr(&out);
        assert!(err.contains(name), "{err}");
        assert!(err.contains(needle), "{name}: {err}");
    }
}

#[test]
fn missing_file_is_an_input_error() {
    let out = verigate(&["validate", "/nonexistent/data.jsonl"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn synth_from_config_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("synth_config.json");
    let a = synth(dir.path(), "a.jsonl", &["--config", s(&config)]);
    let b = synth(dir.path(), "b.jsonl", &["--config", s(&config)]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn synth_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("synth_config.json");
    let a = synth(dir.path(), "a.jsonl", &["--config", s(&config), "--seed", "99", "--n-samples", "20"]);
    let out = verigate(&["validate", s(&a)]);
    assert!(stdout(&out).contains("20 records"), "{}", stdout(&out));
    assert!(std::fs::read_to_string(a).unwrap().contains("seed 99"));
}

#[test]
fn calibrate_refuses_dev_as_eval() {
    let dev = fixture("small_dev.jsonl");
    let out = verigate(&["calibrate", "--dev", s(&dev), "--eval", s(&dev), "--signal", "entropy:2"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("protocol violation"));

    // Same file through a different spelling.
    let alias = dev.parent().unwrap().join("../fixtures/small_dev.jsonl");
    let out = verigate(&["calibrate", "--dev", s(&dev), "--eval", s(&alias), "--signal", "entropy:2"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn evaluate_refuses_dev_as_eval() {
    let dev = fixture("small_dev.jsonl");
    let out = verigate(&["evaluate", "--dev", s(&dev), "--eval", s(&dev), "--signal", "entropy:2"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn calibrate_route_evaluate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let dev = fixture("small_dev.jsonl");
    let test = fixture("small.jsonl");

    let out = verigate(&["calibrate", "--dev", s(&dev), "--signal", "entropy:2", "--out", s(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("Calibration of entropy:2"));
    let policy_path = out_dir.join("policy.json");
    let policy: Value = serde_json::from_str(&std::fs::read_to_string(&policy_path).unwrap()).unwrap();
    assert_eq!(policy["signal"]["kind"], "attention_entropy");
    assert_eq!(policy["signal"]["layer"], 2);
    assert!(out_dir.join("policy.txt").exists());

    let out = verigate(&["route", "--policy", s(&policy_path), "--eval", s(&test), "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["report"], "route");
    let run = &doc["results"]["splits"][0];
    assert_eq!(run["split"], "test");
    assert_eq!(run["decisions"].as_array().unwrap().len(), 40);

    let out = verigate(&[
        "evaluate",
        "--policy",
        s(&policy_path),
        "--eval",
        s(&test),
        "--bootstrap-n",
        "200",
        "--out",
        s(&out_dir),
        "--format",
        "both",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("evaluate.json")).unwrap()).unwrap();
    assert_eq!(doc["config"]["bootstrap"]["n_resamples"], 200);
    let row = &doc["results"]["splits"][0];
    assert_eq!(row["n"], 40);
    assert!(std::fs::read_to_string(out_dir.join("evaluate.txt")).unwrap().contains("RSP"));
}

#[test]
fn evaluate_with_inline_calibration_is_deterministic() {
    let dev = fixture("small_dev.jsonl");
    let test = fixture("small.jsonl");
    let args = [
        "evaluate",
        "--dev",
        s(&dev),
        "--eval",
        s(&test),
        "--signal",
        "inv-top1",
        "--bootstrap-n",
        "300",
        "--seed",
        "5",
        "--format",
        "json",
    ];
    let a = verigate(&args);
    let b = verigate(&args);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_format_writes_only_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = verigate(&[
        "report",
        "oracle",
        "--eval",
        s(&fixture("small.jsonl")),
        "--out",
        s(dir.path()),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("oracle.json").exists());
    assert!(!dir.path().join("oracle.txt").exists());
    assert!(out.stdout.is_empty());
}

#[test]
fn fixbreak_recovers_planted_counts() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "d.jsonl", &["--n-samples", "1000", "--no-traces"]);
    let out = verigate(&["report", "fixbreak", "--eval", s(&data), "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &doc["results"][0];
    assert_eq!(row["fixes"], 100);
    assert_eq!(row["breaks"], 50);
    assert_eq!(row["net"], 50);
}

#[test]
fn shared_split_names_are_prefixed() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), "a.jsonl", &["--n-samples", "30", "--no-traces", "--seed", "1"]);
    let b = synth(dir.path(), "b.jsonl", &["--n-samples", "30", "--no-traces", "--seed", "2"]);
    let out = verigate(&["report", "fixbreak", "--eval", s(&a), "--eval", s(&b), "--format", "json"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["results"][0]["split"], "a:synthetic");
    assert_eq!(doc["results"][1]["split"], "b:synthetic");
}

#[test]
fn every_report_kind_runs() {
    let test = fixture("small.jsonl");
    for kind in ["fixbreak", "conditions", "oracle", "layersweep"] {
        let out = verigate(&["report", kind, "--eval", s(&test), "--format", "text"]);
        assert_eq!(code(&out), 0, "{kind}: {}", stderr(&out));
        assert!(!out.stdout.is_empty());
    }
    let out = verigate(&["report", "ratesweep", "--eval", s(&test), "--signal", "entropy:2", "--rates", "5,10"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("Always-on (100%)"));
}

#[test]
fn ratesweep_needs_a_signal() {
    let out = verigate(&["report", "ratesweep", "--eval", s(&fixture("small.jsonl"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--signal"));
}

#[test]
fn trace_reports_reject_answers_only_data() {
    let out = verigate(&["report", "layersweep", "--eval", s(&fixture("answers_only.jsonl"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("answers_only.jsonl"));
}

#[test]
fn single_class_labels_are_an_analysis_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(
        dir.path(),
        "flat.jsonl",
        &["--n-samples", "40", "--n-layers", "4", "--n-positions", "12", "--signal-layer", "2", "--fix-fraction", "0", "--break-fraction", "0"],
    );
    let out = verigate(&["report", "layersweep", "--eval", s(&data)]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn baseline_condition_is_rejected() {
    let out = verigate(&["report", "fixbreak", "--eval", s(&fixture("small.jsonl")), "--condition", "baseline"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let body = serde_json::json!({
        "eval": [fixture("small.jsonl")],
        "signal": "entropy:2",
        "rates": [10.0, 20.0],
        "format": "json",
    });
    std::fs::write(&config, body.to_string()).unwrap();
    let out = verigate(&["report", "ratesweep", "--config", s(&config)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["config"]["signal"]["layer"], 2);
    // Baseline, two rates, always-on.
    assert_eq!(doc["results"][0]["rows"].as_array().unwrap().len(), 4);

    std::fs::write(&config, r#"{"bogus": 1}"#).unwrap();
    let out = verigate(&["report", "fixbreak", "--config", s(&config)]);
    assert_eq!(code(&out), 2);
}
