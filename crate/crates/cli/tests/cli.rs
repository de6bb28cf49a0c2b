//! End-to-end tests of the `synthpriv` binary: output shape, determinism,
//! configuration handling, and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_synthpriv"))
}

/// Repository-level directory holding the evaluator score sheets that ship
/// with the workspace.
fn sheet_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).expect("write test input");
    path
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "command failed with {:?}: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

const SCHEMA: &str = r#"{"columns":[
  {"name":"age","kind":"numeric","quasi":true},
  {"name":"zip","kind":"categorical","quasi":true},
  {"name":"income","kind":"numeric"},
  {"name":"diagnosis","kind":"categorical","sensitive":true}
]}"#;

const REAL: &str = "age,zip,income,diagnosis\n\
34,10001,52000,flu\n45,10002,61000,healthy\n29,10001,48000,flu\n\
52,10003,75000,diabetes\n38,10002,58000,healthy\n61,10003,82000,diabetes\n\
27,10001,45000,flu\n49,10002,67000,healthy\n";

const SYNTH: &str = "age,zip,income,diagnosis\n\
35,10001,51000,flu\n44,10002,62000,healthy\n30,10001,47500,flu\n\
53,10003,74000,diabetes\n39,10002,59000,healthy\n60,10003,81000,diabetes\n";

const REFERENCE: &str = "age,zip,income,diagnosis\n\
31,10004,50000,healthy\n58,10005,79000,diabetes\n\
42,10004,63000,flu\n26,10005,44000,healthy\n";

/// Writes the standard real/synthetic/reference trio plus schema sidecar.
fn standard_inputs(dir: &Path) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    (
        write(dir, "real.csv", REAL),
        write(dir, "synth.csv", SYNTH),
        write(dir, "reference.csv", REFERENCE),
        write(dir, "schema.json", SCHEMA),
    )
}

fn metric_names(reports: &serde_json::Value) -> Vec<String> {
    reports
        .as_array()
        .expect("reports form an array")
        .iter()
        .map(|r| r["metric"].as_str().expect("metric name").to_string())
        .collect()
}

#[test]
fn privacy_run_emits_all_metrics_as_canonical_json() {
    let dir = tempfile::tempdir().unwrap();
    let (real, synth, reference, schema) = standard_inputs(dir.path());
    let output = bin()
        .args(["privacy", "run", "--real"])
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .arg("--reference")
        .arg(&reference)
        .arg("--schema")
        .arg(&schema)
        .args(["--seed", "7"])
        .output()
        .unwrap();
    let text = stdout_of(&output);
    let reports: serde_json::Value = serde_json::from_str(&text).expect("stdout parses as JSON");
    assert_eq!(
        metric_names(&reports),
        ["dcr", "eps_id", "t_mia", "attr_disclosure", "domias", "idr"]
    );
    for report in reports.as_array().unwrap() {
        let digest = report["config_digest"].as_str().unwrap();
        assert_eq!(digest.len(), 64, "sha-256 hex digest");
        assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));
        assert_eq!(report["seed"], serde_json::json!(7));
        assert!(report["values"].as_object().map(|m| !m.is_empty()).unwrap_or(false));
        assert!(report["timestamp"].as_str().unwrap().ends_with('Z'));
    }
    // The membership attack found most members at near-zero distances.
    let t_mia = &reports[2];
    assert_eq!(t_mia["values"]["tp"]["value"], serde_json::json!(7));
    assert_eq!(t_mia["values"]["recall"]["value"], serde_json::json!(0.875));
}

#[test]
fn reports_are_identical_across_runs_and_thread_counts_modulo_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let (real, synth, reference, schema) = standard_inputs(dir.path());
    let run = |threads: &str| -> String {
        let output = bin()
            .args(["privacy", "run", "--threads", threads, "--real"])
            .arg(&real)
            .arg("--synthetic")
            .arg(&synth)
            .arg("--reference")
            .arg(&reference)
            .arg("--schema")
            .arg(&schema)
            .output()
            .unwrap();
        stdout_of(&output)
    };
    let strip = regex::Regex::new(r#""timestamp":"[^"]*""#).unwrap();
    let one = run("1");
    let eight = run("8");
    assert_eq!(
        strip.replace_all(&one, r#""timestamp":""#),
        strip.replace_all(&eight, r#""timestamp":""#),
        "reports must not depend on thread count"
    );
}

#[test]
fn explicit_metric_list_runs_in_canonical_order() {
    let dir = tempfile::tempdir().unwrap();
    let (real, synth, _, _) = standard_inputs(dir.path());
    let output = bin()
        .args(["privacy", "run", "--metrics", "eps_id,dcr", "--real"])
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .output()
        .unwrap();
    let reports: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(metric_names(&reports), ["dcr", "eps_id"]);
}

#[test]
fn default_metric_set_shrinks_to_available_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let (real, synth, _, schema) = standard_inputs(dir.path());

    // No reference: membership attacks skipped; schema flags keep the
    // disclosure metrics alive.
    let output = bin()
        .args(["privacy", "run", "--real"])
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .arg("--schema")
        .arg(&schema)
        .output()
        .unwrap();
    let reports: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(metric_names(&reports), ["dcr", "eps_id", "attr_disclosure", "idr"]);

    // No schema either: no quasi/sensitive flags, only the similarity
    // metrics remain.
    let output = bin()
        .args(["privacy", "run", "--real"])
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .output()
        .unwrap();
    let reports: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(metric_names(&reports), ["dcr", "eps_id"]);
}

#[test]
fn text_format_prints_one_block_per_metric() {
    let dir = tempfile::tempdir().unwrap();
    let (real, synth, _, _) = standard_inputs(dir.path());
    let output = bin()
        .args(["privacy", "run", "--format", "text", "--metrics", "dcr", "--real"])
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .output()
        .unwrap();
    let text = stdout_of(&output);
    assert!(text.starts_with("dcr\n"), "got: {text}");
    assert!(text.contains("  value = "), "got: {text}");
}

#[test]
fn config_file_sets_parameters_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let (real, synth, _, _) = standard_inputs(dir.path());
    let config = write(
        dir.path(),
        "config.json",
        r#"{"metrics":["dcr"],"dcr":{"aggregate":"mean"}}"#,
    );

    let output = bin()
        .args(["privacy", "run", "--config"])
        .arg(&config)
        .arg("--real")
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .output()
        .unwrap();
    let reports: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(metric_names(&reports), ["dcr"]);
    assert_eq!(reports[0]["config"]["aggregate"], serde_json::json!("mean"));

    // --metrics beats the configured list; the aggregate setting stays.
    let output = bin()
        .args(["privacy", "run", "--metrics", "eps_id", "--config"])
        .arg(&config)
        .arg("--real")
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .output()
        .unwrap();
    let reports: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(metric_names(&reports), ["eps_id"]);
}

#[test]
fn fixed_tau_round_trips_into_the_report_config() {
    let dir = tempfile::tempdir().unwrap();
    let (real, synth, reference, schema) = standard_inputs(dir.path());
    let config = write(
        dir.path(),
        "config.json",
        r#"{"t_mia":{"tau":{"rule":"fixed","value":0.5}}}"#,
    );
    let output = bin()
        .args(["privacy", "run", "--metrics", "t_mia", "--config"])
        .arg(&config)
        .arg("--real")
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .arg("--reference")
        .arg(&reference)
        .arg("--schema")
        .arg(&schema)
        .output()
        .unwrap();
    let reports: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(reports[0]["config"]["tau"], serde_json::json!({"rule": "fixed", "value": 0.5}));
    assert_eq!(reports[0]["values"]["threshold"]["value"], serde_json::json!(0.5));
}

#[test]
fn unknown_configuration_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (real, synth, _, _) = standard_inputs(dir.path());
    let config = write(dir.path(), "config.json", r#"{"metrcs":["dcr"]}"#);
    let output = bin()
        .args(["privacy", "run", "--config"])
        .arg(&config)
        .arg("--real")
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("metrcs"), "got: {stderr}");
}

#[test]
fn invalid_inputs_exit_2_and_io_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let (real, synth, _, _) = standard_inputs(dir.path());

    // Unknown metric name.
    let output = bin()
        .args(["privacy", "run", "--metrics", "bogus", "--real"])
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // Explicitly requested metric whose inputs are missing.
    let output = bin()
        .args(["privacy", "run", "--metrics", "domias", "--real"])
        .arg(&real)
        .arg("--synthetic")
        .arg(&synth)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("reference"));

    // Unreadable input file.
    let output = bin()
        .args(["privacy", "run", "--real"])
        .arg(dir.path().join("missing.csv"))
        .arg("--synthetic")
        .arg(&synth)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));

    // Bad command line (clap's own exit code).
    let output = bin().args(["privacy", "run", "--real"]).arg(&real).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn aggregate_prints_the_shipped_density_attack_assessment() {
    let output = bin()
        .arg("cair")
        .arg("aggregate")
        .arg(sheet_path("domias_e1.json"))
        .arg(sheet_path("domias_e2.json"))
        .output()
        .unwrap();
    let text = stdout_of(&output);
    assert!(text.starts_with("domias: 3.16 ± 0.06\n"), "got: {text}");
    assert!(text.contains("Interpretability"), "got: {text}");
    assert!(text.contains("R1 Anomalies"), "got: {text}");
}

#[test]
fn aggregate_writes_assessment_json_that_radar_consumes() {
    let dir = tempfile::tempdir().unwrap();
    let assessment_path = dir.path().join("assessment.json");
    let output = bin()
        .arg("cair")
        .arg("aggregate")
        .arg(sheet_path("idr_e1.json"))
        .arg(sheet_path("idr_e2.json"))
        .arg("--out")
        .arg(&assessment_path)
        .output()
        .unwrap();
    stdout_of(&output);

    let assessment: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&assessment_path).unwrap()).unwrap();
    assert_eq!(assessment["metric"], serde_json::json!("idr"));
    let overall = assessment["overall"].as_f64().unwrap();
    assert!((overall - 2.765625).abs() < 1e-12, "got {overall}");

    let svg_path = dir.path().join("radar.svg");
    let output = bin()
        .arg("cair")
        .arg("radar")
        .arg(&assessment_path)
        .arg("--out")
        .arg(&svg_path)
        .output()
        .unwrap();
    stdout_of(&output);
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"), "got: {}", &svg[..svg.len().min(80)]);
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("<polygon"));
    assert_eq!(svg.matches("<circle").count(), 4, "one ring per rubric grade");
}

#[test]
fn aggregate_rejects_sheets_for_different_metrics() {
    let output = bin()
        .arg("cair")
        .arg("aggregate")
        .arg(sheet_path("dcr_e1.json"))
        .arg(sheet_path("domias_e2.json"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn radar_rejects_malformed_assessments() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "assessment.json", "{\"metric\": 3}");
    let output = bin()
        .arg("cair")
        .arg("radar")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("radar.svg"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    let output = bin()
        .arg("cair")
        .arg("radar")
        .arg(dir.path().join("missing.json"))
        .arg("--out")
        .arg(dir.path().join("radar.svg"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn bench_reports_a_timing_per_size() {
    let output = bin().args(["bench", "--sizes", "64,128", "--columns", "4"]).output().unwrap();
    let text = stdout_of(&output);
    assert!(text.contains("rows=64"), "got: {text}");
    assert!(text.contains("rows=128"), "got: {text}");
    assert_eq!(text.matches("pairs_per_s").count(), 2);
}

#[test]
fn help_screens_render() {
    for args in [vec!["--help"], vec!["privacy", "run", "--help"], vec!["cair", "--help"]] {
        let output = bin().args(&args).output().unwrap();
        assert!(output.status.success(), "help failed for {args:?}");
    }
}
