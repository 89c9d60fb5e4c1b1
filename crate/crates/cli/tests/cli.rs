//! End-to-end tests driving the compiled binary through every subcommand,
//! pinning the file formats, output schemas, and exit codes.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

const TRIAL_HEADER: &str =
    "n,trial,seed,largest_size,largest_fraction,second_size,largest_part_0,largest_part_1,num_components";

const SUPER_SPEC: &str = r#"{
  "parts": 2,
  "atoms": [
    { "part": 1, "degree": [0, 1], "mass": "1/4" },
    { "part": 1, "degree": [0, 3], "mass": "1/4" },
    { "part": 2, "degree": [2, 0], "mass": "1/2" }
  ]
}"#;

const SUB_SPEC: &str = r#"{
  "parts": 2,
  "atoms": [
    { "part": 1, "degree": [0, 1], "mass": "7/13" },
    { "part": 1, "degree": [0, 3], "mass": "1/13" },
    { "part": 2, "degree": [2, 0], "mass": "5/13" }
  ]
}"#;

/// Intensities 0->1 and 1->0 disagree (1.0 vs 0.5), so validation must fail.
const ASYMMETRIC_SPEC: &str = r#"{
  "parts": 2,
  "atoms": [
    { "part": 1, "degree": [0, 2], "mass": "1/2" },
    { "part": 2, "degree": [1, 0], "mass": "1/2" }
  ]
}"#;

/// Two bipartite halves with no edges between them: a reducible mean matrix.
const SPLIT_SPEC: &str = r#"{
  "parts": 4,
  "atoms": [
    { "part": 1, "degree": [0, 2, 0, 0], "mass": "1/4" },
    { "part": 2, "degree": [2, 0, 0, 0], "mass": "1/4" },
    { "part": 3, "degree": [0, 0, 0, 2], "mass": "1/4" },
    { "part": 4, "degree": [0, 0, 2, 0], "mass": "1/4" }
  ]
}"#;

const SEQUENCE_FILE: &str = r#"{
  "parts": 2,
  "n": 8,
  "atoms": [
    { "part": 1, "degree": [0, 1], "count": 2 },
    { "part": 1, "degree": [0, 3], "count": 2 },
    { "part": 2, "degree": [2, 0], "count": 4 }
  ]
}"#;

fn fixture(tag: &str, name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("multigiant-cli-{}-{tag}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_multigiant"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.code().expect("exit code"),
        String::from_utf8(output.stdout).expect("stdout is utf-8"),
        String::from_utf8(output.stderr).expect("stderr is utf-8"),
    )
}

fn json(stdout: &str) -> Value {
    serde_json::from_str(stdout).expect("stdout is JSON")
}

#[test]
fn validate_accepts_a_valid_model() {
    let spec = fixture("validate-ok", "spec.json", SUPER_SPEC);
    let (code, stdout, _) = run(&["validate", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, 0);
    let body = json(&stdout);
    assert_eq!(body["valid"], Value::Bool(true));
    assert_eq!(body["report"]["pairs"], serde_json::json!([[0, 1], [1, 0]]));
    assert!(body["report"]["errors"].as_array().unwrap().is_empty());
}

#[test]
fn validate_rejects_asymmetric_intensities_with_exit_two() {
    let spec = fixture("validate-bad", "spec.json", ASYMMETRIC_SPEC);
    let (code, stdout, _) = run(&["validate", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, 2);
    let body = json(&stdout);
    assert_eq!(body["valid"], Value::Bool(false));
    assert!(!body["report"]["errors"].as_array().unwrap().is_empty());
}

#[test]
fn validate_reads_a_sequence_file() {
    let seq = fixture("validate-seq", "seq.json", SEQUENCE_FILE);
    let (code, stdout, _) = run(&["validate", "--seq", seq.to_str().unwrap()]);
    assert_eq!(code, 0);
    let body = json(&stdout);
    assert_eq!(body["valid"], Value::Bool(true));
    assert_eq!(body["stats"]["n"], serde_json::json!(8));
    assert_eq!(body["stats"]["omega"], serde_json::json!(3));
}

#[test]
fn analyze_prints_the_spectral_summary() {
    let spec = fixture("analyze", "spec.json", SUPER_SPEC);
    let (code, stdout, _) = run(&["analyze", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, 0);
    let body = json(&stdout);
    let gamma = body["gamma"].as_f64().unwrap();
    assert!((gamma - 1.5f64.sqrt()).abs() < 1e-9);
    assert_eq!(body["regime"], "supercritical");
    assert_eq!(body["irreducible"], Value::Bool(true));
    assert_eq!(body["newman_sum"].as_f64().unwrap(), 0.5);
    assert!(body["residual"].as_f64().unwrap() <= 1e-10);
    let left: Vec<f64> = body["left_vector"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(left.iter().all(|&v| v > 0.0));
    assert!((left.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert_eq!(body["matrix"], serde_json::json!([[0.0, 1.0], [1.5, 0.0]]));
}

#[test]
fn analyze_reports_reducible_blocks() {
    let spec = fixture("analyze-split", "spec.json", SPLIT_SPEC);
    let (code, stdout, _) = run(&["analyze", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, 0);
    let body = json(&stdout);
    assert_eq!(body["irreducible"], Value::Bool(false));
    assert_eq!(body["gamma"], Value::Null);
    assert_eq!(body["blocks"].as_array().unwrap().len(), 2);
}

#[test]
fn bp_solves_the_fixed_point_and_cross_checks_by_simulation() {
    let spec = fixture("bp", "spec.json", SUPER_SPEC);
    let (code, stdout, _) = run(&[
        "bp",
        "--spec",
        spec.to_str().unwrap(),
        "--trials",
        "4000",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    let body = json(&stdout);
    let eta = body["eta"].as_f64().unwrap();
    assert!((eta - 23.0 / 27.0).abs() < 1e-9);
    let q = body["q"].as_array().unwrap();
    assert_eq!(q.len(), 2);
    for value in q {
        assert!((value.as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
    }
    let mc = body["mc_survival"].as_f64().unwrap();
    let se = body["stderr"].as_f64().unwrap();
    assert!(
        (mc - eta).abs() <= 5.0 * se,
        "mc {mc} vs eta {eta} (se {se})"
    );
}

#[test]
fn bp_skips_the_simulation_when_trials_is_zero() {
    let spec = fixture("bp-zero", "spec.json", SUB_SPEC);
    let (code, stdout, _) = run(&["bp", "--spec", spec.to_str().unwrap(), "--trials", "0"]);
    assert_eq!(code, 0);
    let body = json(&stdout);
    assert_eq!(body["eta"].as_f64().unwrap(), 0.0);
    assert_eq!(body["mc_survival"], Value::Null);
    assert_eq!(body["stderr"], Value::Null);
}

#[test]
fn sample_emits_a_header_line_then_edges() {
    let spec = fixture("sample", "spec.json", SUPER_SPEC);
    let (code, stdout, _) = run(&[
        "sample",
        "--spec",
        spec.to_str().unwrap(),
        "--n",
        "12",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    let header = json(lines.next().unwrap());
    assert_eq!(header["n"], serde_json::json!(12));
    assert_eq!(header["seed"], serde_json::json!(3));
    assert_eq!(header["attempts"], serde_json::json!(1));
    let edges: Vec<(u32, u32)> = lines
        .map(|line| {
            let mut it = line.split_whitespace();
            let u: u32 = it.next().unwrap().parse().unwrap();
            let v: u32 = it.next().unwrap().parse().unwrap();
            assert!(it.next().is_none());
            (u, v)
        })
        .collect();
    // 12 vertices in proportion 1/4 : 1/4 : 1/2 give 12 clones per side.
    assert_eq!(edges.len(), 12);
    assert!(edges.iter().all(|&(u, v)| u <= v && v < 12));
    let again = run(&[
        "sample",
        "--spec",
        spec.to_str().unwrap(),
        "--n",
        "12",
        "--seed",
        "3",
    ]);
    assert_eq!(again.1, stdout, "same seed must reproduce the sample");
}

#[test]
fn sample_reads_sequence_files_and_honors_simple() {
    let seq = fixture("sample-seq", "seq.json", SEQUENCE_FILE);
    let (code, stdout, _) = run(&[
        "sample",
        "--seq",
        seq.to_str().unwrap(),
        "--seed",
        "11",
        "--simple",
    ]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    let header = json(lines.next().unwrap());
    assert_eq!(header["n"], serde_json::json!(8));
    assert!(header["attempts"].as_u64().unwrap() >= 1);
    let edges: Vec<(u32, u32)> = lines
        .map(|line| {
            let mut it = line.split_whitespace();
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(edges.len(), 8);
    // Simple graph: no repeated vertex pair.
    let mut seen = edges.clone();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), edges.len());
}

#[test]
fn simulate_prints_the_frozen_csv_schema() {
    let spec = fixture("simulate", "spec.json", SUPER_SPEC);
    let args = [
        "simulate",
        "--spec",
        spec.to_str().unwrap(),
        "--n",
        "400",
        "--trials",
        "3",
        "--seed",
        "5",
    ];
    let (code, stdout, _) = run(&args);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), TRIAL_HEADER);
    assert_eq!(lines.count(), 3);
    let repeat = run(&args);
    assert_eq!(repeat.1, stdout, "same plan must reproduce the CSV");
}

#[test]
fn simulate_is_identical_across_thread_counts() {
    let spec = fixture("simulate-threads", "spec.json", SUPER_SPEC);
    let base = [
        "simulate",
        "--spec",
        spec.to_str().unwrap(),
        "--n",
        "400",
        "--trials",
        "4",
        "--seed",
        "5",
    ];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let four = run(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.0, 0);
    assert_eq!(one.1, four.1);
}

#[test]
fn verdict_passes_reports_json_and_writes_the_trial_csv() {
    let spec = fixture("verdict", "spec.json", SUPER_SPEC);
    let out = spec.with_file_name("trials.csv");
    let (code, stdout, _) = run(&[
        "verdict",
        "--spec",
        spec.to_str().unwrap(),
        "--n",
        "400,1600",
        "--trials",
        "5",
        "--seed",
        "2026",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let body = json(&stdout);
    assert_eq!(body["verdict"], "pass");
    assert!((body["gamma"].as_f64().unwrap() - 1.5f64.sqrt()).abs() < 1e-9);
    assert!((body["eta"].as_f64().unwrap() - 23.0 / 27.0).abs() < 1e-9);
    assert_eq!(body["rows"].as_array().unwrap().len(), 2);
    let checks = body["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c["passed"] == Value::Bool(true)));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), TRIAL_HEADER);
    assert_eq!(lines.count(), 10);
}

#[test]
fn verdict_on_a_reducible_model_is_degenerate_not_failed() {
    let spec = fixture("verdict-split", "spec.json", SPLIT_SPEC);
    let (code, stdout, _) = run(&[
        "verdict",
        "--spec",
        spec.to_str().unwrap(),
        "--n",
        "100",
        "--trials",
        "1",
    ]);
    assert_eq!(code, 0);
    let body = json(&stdout);
    assert_eq!(body["verdict"], "degenerate");
    assert_eq!(body["gamma"], Value::Null);
    assert_eq!(body["blocks"].as_array().unwrap().len(), 2);
    assert!(body["trials"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_traces_the_transition() {
    let from = fixture("sweep", "from.json", SUB_SPEC);
    let to = from.with_file_name("to.json");
    fs::write(&to, SUPER_SPEC).unwrap();
    let (code, stdout, _) = run(&[
        "sweep",
        "--from",
        from.to_str().unwrap(),
        "--to",
        to.to_str().unwrap(),
        "--params",
        "0,1",
        "--n",
        "2000",
        "--trials",
        "2",
        "--seed",
        "9",
    ]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "param,gamma,eta,mean_fraction_n2000");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][1] < 1.0 && rows[1][1] > 1.0, "gamma crosses 1");
    assert!(rows[0][3] < 0.05 && rows[1][3] > 0.5, "fraction jumps");
}

#[test]
fn missing_input_files_exit_one() {
    let (code, _, stderr) = run(&["analyze", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("error"));
}

#[test]
fn invalid_models_are_rejected_by_compute_commands() {
    let spec = fixture("analyze-bad", "spec.json", ASYMMETRIC_SPEC);
    let (code, _, stderr) = run(&["analyze", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("invalid"));
}

#[test]
fn usage_errors_exit_one() {
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["sample", "--spec", "x.json"]);
    assert_eq!(code, 1, "--spec without --n is a usage error");
}
