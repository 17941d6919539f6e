//! Black-box tests for the installed binary: exit codes, file round-trips,
//! JSON envelope shape, and determinism of the serialized reports.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigidgen"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn code(output: &Output) -> i32 {
    output.status.code().unwrap_or(-1)
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("stdout is a JSON document")
}

fn path_str(path: &Path) -> &str {
    path.to_str().expect("temp paths are UTF-8")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    let version = run(&["--version"]);
    assert_eq!(code(&version), 0);
    assert!(String::from_utf8_lossy(&version.stdout).contains("rigidgen"));
}

#[test]
fn unknown_subcommands_are_usage_errors() {
    let output = run(&["frobnicate"]);
    assert_eq!(code(&output), 2);
    assert!(!output.stderr.is_empty());
}

#[test]
fn json_envelope_carries_schema_command_and_result() {
    let output = run(&[
        "check", "conditions", "--family", "oa", "--q", "2", "--n", "3", "--t", "1", "--format",
        "json",
    ]);
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    let envelope = stdout_json(&output);
    assert_eq!(envelope["schema"], "rigidgen-report/1");
    assert_eq!(envelope["command"], "check conditions");
    assert!(envelope["elapsed_ms"].is_number());
    assert!(envelope["result"].is_object());
}

#[test]
fn json_reports_are_deterministic_up_to_timing() {
    let args = [
        "analyze", "predict", "--family", "oa", "--q", "2", "--n", "2", "--t", "1", "--N", "2",
        "--format", "json",
    ];
    let mut first = stdout_json(&run(&args));
    let mut second = stdout_json(&run(&args));
    first.as_object_mut().expect("envelope").remove("elapsed_ms");
    second.as_object_mut().expect("envelope").remove("elapsed_ms");
    assert_eq!(first, second);
}

#[test]
fn build_verify_round_trip_and_header_mismatch() {
    let dir = tempfile::tempdir().expect("temp dir creates");
    let path = dir.path().join("full.txt");
    assert_eq!(
        code(&run(&["oa", "build", "--q", "2", "--n", "3", "--t", "1", "--out", path_str(&path)])),
        0
    );
    assert_eq!(code(&run(&["oa", "verify", "--in", path_str(&path)])), 0);
    // The full array has full strength, so a stricter check still passes.
    assert_eq!(
        code(&run(&["oa", "verify", "--in", path_str(&path), "--t", "3"])),
        0
    );
    // Contradicting the file header is a usage error, not a verified failure.
    assert_eq!(
        code(&run(&["oa", "verify", "--in", path_str(&path), "--q", "3"])),
        2
    );
}

#[test]
fn search_exit_codes_distinguish_failure_kinds() {
    // Exhausting the trial budget is a verified failure.
    let exhausted = run(&[
        "oa", "search", "--q", "2", "--n", "2", "--t", "1", "--N", "2", "--trials", "2", "--seed",
        "5",
    ]);
    assert_eq!(code(&exhausted), 1);
    // A fractional expected vector can never be hit: configuration error.
    let fractional = run(&["oa", "search", "--q", "2", "--n", "2", "--t", "1", "--N", "3"]);
    assert_eq!(code(&fractional), 2);
    assert!(!fractional.stderr.is_empty());
}

#[test]
fn malformed_inputs_are_config_errors_not_panics() {
    let dir = tempfile::tempdir().expect("temp dir creates");
    let junk = dir.path().join("junk.txt");
    std::fs::write(&junk, "# oa q=banana\n1 2 x\n").expect("fixture writes");
    for family in ["oa", "design", "perm"] {
        let output = run(&[family, "verify", "--in", path_str(&junk)]);
        assert_eq!(code(&output), 2, "{family} verify should reject junk");
        let stderr = String::from_utf8_lossy(&output.stderr);
        assert!(!stderr.contains("panicked"), "{family} verify panicked: {stderr}");
        assert!(!stderr.is_empty());
    }
    let missing = run(&["oa", "verify", "--in", path_str(&dir.path().join("absent.txt"))]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn fixture_files_round_trip_through_the_verifier() {
    let dir = tempfile::tempdir().expect("temp dir creates");
    let path = dir.path().join("moebius.txt");
    let fixture = run(&[
        "perm", "fixture", "--name", "moebius", "--q", "2", "--unit-det", "--out",
        path_str(&path),
    ]);
    assert_eq!(code(&fixture), 0, "{}", String::from_utf8_lossy(&fixture.stderr));
    assert_eq!(code(&run(&["perm", "verify", "--in", path_str(&path)])), 0);
    assert_eq!(
        code(&run(&["perm", "verify", "--in", path_str(&path), "--t", "3"])),
        0
    );
    // Lower strengths follow from the natural one.
    assert_eq!(
        code(&run(&["perm", "verify", "--in", path_str(&path), "--t", "2"])),
        0
    );
}

#[test]
fn lemma_battery_reports_pass_on_a_desk_instance() {
    let output = run(&[
        "analyze", "lemmas", "--family", "design", "--v", "4", "--k", "3", "--t", "1", "--N", "2",
        "--c", "10",
    ]);
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("PASS"), "expected a PASS verdict:\n{text}");
}

#[test]
fn thread_cap_is_accepted() {
    let output = run(&[
        "--threads", "1", "check", "conditions", "--family", "oa", "--q", "2", "--n", "3", "--t",
        "1",
    ]);
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
}
