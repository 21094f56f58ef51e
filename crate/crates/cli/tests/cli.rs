use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use promise_cli::{main_with_args, EXIT_FAILURE, EXIT_LIMIT, EXIT_OK, EXIT_USAGE};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios").join(name)
}

fn promise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_promise"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn temp(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

// in-process run, for cases that only need the exit code and output text
fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("promise").chain(args.iter().copied());
    let code = main_with_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn check_reports_counts_for_jub() {
    let (code, out, _) = run(&["check", path(&scenario("jub.promise"))]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("agents: 3"));
    assert!(out.contains("exclusive: ~tbc2JUB"));
    assert!(out.ends_with("status: ok\n"));
}

#[test]
fn check_json_lists_no_law_violations() {
    for name in ["jub.promise", "isp.promise", "travel.promise", "compliance.promise"] {
        let (code, out, _) = run(&["check", path(&scenario(name)), "--format", "json"]);
        assert_eq!(code, EXIT_OK, "{name}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["status"], "ok");
        assert_eq!(v["law_violations"].as_array().unwrap().len(), 0);
    }
}

#[test]
fn check_warns_about_subordinate_performers() {
    let (code, out, err) = run(&["check", path(&scenario("compliance.promise"))]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("warning:"), "{out}");
    assert!(err.contains("clerk"), "{err}");
}

#[test]
fn type_mismatch_is_a_semantic_failure() {
    let f = temp("agent a b\ntype t\ntype u\ntask x : t\ntask y : u\nincompatible x # y\nrun skip\n");
    let (code, _, err) = run(&["check", path(f.path())]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains(":6:"), "{err}");
}

#[test]
fn syntax_error_reports_line_and_column() {
    let f = temp("agent a b\ntype t\ntask x : t\nrun pi(a, x b)\n");
    let (code, _, err) = run(&["explore", path(f.path())]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains(":4:"), "{err}");
}

#[test]
fn unreadable_scenario_is_a_usage_error() {
    let (code, _, err) = run(&["check", "/nonexistent/x.promise"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("cannot read"));
}

#[test]
fn bad_invocations_exit_64() {
    assert_eq!(run(&[]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    let jub = scenario("jub.promise");
    assert_eq!(run(&["explore", path(&jub), "--node-limit", "0"]).0, EXIT_USAGE);
    assert_eq!(run(&["explore", path(&jub), "--format", "yaml"]).0, EXIT_USAGE);
    assert_eq!(run(&["verify-trace", path(&jub)]).0, EXIT_USAGE);
}

#[test]
fn help_goes_to_stdout() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verify-trace"));
}

#[test]
fn explore_jub_counts() {
    let (code, out, _) = run(&["explore", path(&scenario("jub.promise")), "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["nodes"], 48);
    assert_eq!(v["edges"], 96);
    assert_eq!(v["traces"].as_array().unwrap().len(), 340);
    assert_eq!(v["deadlocks"].as_array().unwrap().len(), 0);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn strict_explore_reports_deadlocks() {
    let (code, out, _) = run(&[
        "explore",
        path(&scenario("jub.promise")),
        "--strict-conflicts",
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["conflict_scope"], "strict");
    assert_eq!(v["nodes"], 44);
    assert_eq!(v["deadlocks"].as_array().unwrap().len(), 2);
}

#[test]
fn limits_exit_2() {
    let jub = scenario("jub.promise");
    let (code, _, err) = run(&["explore", path(&jub), "--node-limit", "10"]);
    assert_eq!(code, EXIT_LIMIT);
    assert!(err.contains("node limit"), "{err}");
    let (code, _, _) = run(&["explore", path(&jub), "--max-traces", "5"]);
    assert_eq!(code, EXIT_LIMIT);
}

#[test]
fn run_output_is_a_trace_that_verifies() {
    let jub = scenario("jub.promise");
    for seed in ["0", "1", "42", "1234567"] {
        let out = promise(&["run", path(&jub), "--seed", seed]);
        assert_eq!(out.status.code(), Some(EXIT_OK));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.starts_with(&format!("# seed: {seed}\n")));
        assert!(text.contains("# outcome: successful"));
        let trace = temp(&text);
        let (code, verdict, _) = run(&["verify-trace", path(&jub), "--trace", path(trace.path())]);
        assert_eq!(code, EXIT_OK, "seed {seed}: {text}");
        assert!(verdict.contains("maximal: yes"), "{verdict}");
    }
}

#[test]
fn run_json_matches_text_run() {
    let jub = scenario("jub.promise");
    let (_, text, _) = run(&["run", path(&jub), "--seed", "7"]);
    let (_, json, _) = run(&["run", path(&jub), "--seed", "7", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let events: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    let json_events: Vec<&str> = v["events"].as_array().unwrap().iter().map(|e| e.as_str().unwrap()).collect();
    assert_eq!(events, json_events);
    assert_eq!(v["seed"], 7);
}

#[test]
fn verify_rejection_names_the_event_and_alternatives() {
    let t = temp("pw(ja, tbc2JUB, ma)\n");
    let (code, out, err) = run(&["verify-trace", path(&scenario("jub.promise")), "--trace", path(t.path())]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(out.starts_with("rejected at event 1 (index 0)"), "{out}");
    assert!(out.contains("pi(ja, tbc2JUB, ma), pi(ju, tbc2JUB, ma)"), "{out}");
    assert!(err.contains("not available"));
}

#[test]
fn verify_prefix_is_accepted_but_not_maximal() {
    let t = temp("pi(ja, tbc2JUB, ma)  # first offer\n\npi(ma, ~tbc2JUB, ja)\n");
    let (code, out, _) = run(&["verify-trace", path(&scenario("jub.promise")), "--trace", path(t.path())]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("maximal: no"));
    assert!(!out.contains("outcome:"));
}

#[test]
fn trace_with_unknown_agent_fails() {
    let t = temp("pi(zed, tbc2JUB, ma)\n");
    let (code, _, err) = run(&["verify-trace", path(&scenario("jub.promise")), "--trace", path(t.path())]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains(":1:"), "{err}");
}
