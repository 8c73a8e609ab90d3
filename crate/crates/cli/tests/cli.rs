use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qflowsec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn qflowsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qflowsec")).args(args).output().expect("binary runs")
}

/// Runs with `--json` into a scratch file and returns the exit code and parsed report.
fn report(tag: &str, args: &[&str]) -> (i32, Value) {
    let path = scratch(&format!("{tag}.json"));
    let out = Command::new(env!("CARGO_BIN_EXE_qflowsec"))
        .args(args)
        .arg("--quiet")
        .arg("--json")
        .arg(&path)
        .output()
        .unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    (out.status.code().unwrap(), serde_json::from_str(&text).unwrap())
}

#[test]
fn validate_accepts_fixtures() {
    for f in ["two-qubit-cnot.qsys", "chain-cnot.qsys", "rm-noisy.qsys", "erin.qsys"] {
        let (code, r) = report(&format!("validate-{f}"), &["validate", "--model", &fixture(f)]);
        assert_eq!(code, 0, "{f}");
        assert_eq!(r["schema"], "qflowsec-report/1");
        assert_eq!(r["command"], "validate");
        assert_eq!(r["exit_code"], 0);
        assert_eq!(r["result"]["ok"], true);
    }
}

#[test]
fn invalid_trace_exits_one() {
    let model = scratch("bad-trace.qsys");
    let text = std::fs::read_to_string(fixture("identity-only.qsys")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["initial"] = serde_json::json!([[0.8, 0.0], [0.0, 0.0]]);
    std::fs::write(&model, v.to_string()).unwrap();
    let (code, r) = report("bad-trace", &["validate", "--model", model.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(r["result"]["ok"], false);
}

#[test]
fn parse_errors_use_the_error_envelope() {
    let model = scratch("broken.qsys");
    std::fs::write(&model, "{ not json").unwrap();
    let (code, r) = report("broken", &["analyze", "--model", model.to_str().unwrap(), "--depth", "2"]);
    assert_eq!(code, 2);
    assert_eq!(r["exit_code"], 2);
    assert_eq!(r["command"], "analyze");
    assert_eq!(r["error"]["kind"], "ParseError");
    assert!(r.get("result").is_none());
}

#[test]
fn missing_file_is_an_input_error() {
    let out = qflowsec(&["validate", "--model", "/nonexistent/model.qsys"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error ["));
}

#[test]
fn bad_flags_are_rejected() {
    assert_eq!(qflowsec(&["examples", "--jobs", "0"]).status.code(), Some(2));
    assert_eq!(qflowsec(&["examples", "--tol", "-1"]).status.code(), Some(2));
    assert_ne!(qflowsec(&["access-check", "--model", &fixture("rm-local.qsys"), "--depth", "1"]).status.code(), Some(0));
}

#[test]
fn analyze_reports_degree_and_witness() {
    let (code, r) = report("analyze", &["analyze", "--model", &fixture("two-qubit-cnot.qsys"), "--depth", "4"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["kind"], "insecurity");
    assert_eq!(r["result"]["report"]["value"], 1.0);

    let (_, q) = report(
        "query",
        &["analyze", "--model", &fixture("two-qubit-cnot.qsys"), "--depth", "4", "--query", "Bob,CNOT,Alice"],
    );
    assert_eq!(q["result"]["kind"], "interference");
    assert_eq!(q["result"]["report"]["value"], 0.5);
}

#[test]
fn unwinding_exit_codes_follow_the_certificate() {
    let secure = ["unwind", "--model", "", "--mode", "one", "--oracle", "builtin:reduced", "--depth", "3"];
    let mut args = secure;
    let rot = fixture("two-qubit-rotations.qsys");
    args[2] = &rot;
    assert_eq!(qflowsec(&args).status.code(), Some(0));
    let leaky = fixture("two-qubit-cnot.qsys");
    args[2] = &leaky;
    assert_eq!(qflowsec(&args).status.code(), Some(1));
}

#[test]
fn oracle_tables_must_match_the_mode() {
    let out = qflowsec(&[
        "unwind",
        "--model",
        &fixture("erin.qsys"),
        "--mode",
        "two",
        "--oracle",
        &format!("table:{}", fixture("erin-equivalence.json")),
        "--fit-eps",
        "--depth",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn access_check_names_a_witness() {
    let (code, r) = report(
        "rm-cnot",
        &["access-check", "--model", &fixture("rm-cnot.qsys"), "--theta", "0", "--eps", "0", "--depth", "3"],
    );
    assert_eq!(code, 1);
    let text = r["result"].to_string();
    assert!(text.contains("CNOT") && text.contains("n2"), "{text}");
}

#[test]
fn composition_bound_holds_for_fixtures() {
    let (code, r) = report(
        "compose",
        &[
            "compose",
            "--left",
            &fixture("two-qubit-cnot.qsys"),
            "--right",
            &fixture("identity-only.qsys"),
            "--check-bound",
            "--depth",
            "3",
        ],
    );
    assert_eq!(code, 0);
    assert_eq!(r["result"]["holds"], true);
}

#[test]
fn csv_output_has_header_and_rows() {
    let path = scratch("examples.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_qflowsec"))
        .args(["examples", "--quiet", "--csv"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path,value"));
    let paths: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert!(!paths.is_empty());
}

#[test]
fn run_prints_observations() {
    let out = qflowsec(&["run", "--model", &fixture("two-qubit-cnot.qsys"), "--seq", "Alice:Rx,Bob:CNOT"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!out.stdout.is_empty());
    assert_eq!(qflowsec(&["run", "--model", &fixture("two-qubit-cnot.qsys"), "--seq", "Alice"]).status.code(), Some(2));
}
