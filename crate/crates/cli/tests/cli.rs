//! End-to-end runner tests: the exit-code contract, report shapes, and the
//! experiment subcommand.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn aperture(args: &[&str], extra: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aperture"));
    cmd.args(args);
    for p in extra {
        cmd.arg(p);
    }
    cmd.output().expect("binary runs")
}

fn scenarios_dir() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios"].iter().collect()
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn bundled_suite_exits_zero_with_json_report() {
    let out = aperture(&["suite"], &[&scenarios_dir().join("suite")]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["schema_version"], 1);
    assert_eq!(value["summary"]["fail"], 0);
    assert!(value["summary"]["checks"].as_u64().unwrap() >= 50);
}

#[test]
fn liar_scenario_reports_impossibility() {
    let out = aperture(
        &["run"],
        &[&scenarios_dir().join("suite").join("03-truth-liar.toml")],
    );
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = value["checks"].as_array().unwrap();
    let classical = checks.iter().find(|c| c["name"] == "classical_search").unwrap();
    assert_eq!(classical["status"], "pass");
    assert_eq!(classical["data"]["witness"], serde_json::Value::Null);
    let kripke = checks.iter().find(|c| c["name"] == "kripke_lfp").unwrap();
    assert_eq!(kripke["data"]["classification"]["liar"], "ungrounded");
}

#[test]
fn failing_check_is_named_and_exits_one() {
    let dir = std::env::temp_dir().join("aperture-fail-suite");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    write_scenario(
        &dir,
        "bad-expectation.toml",
        r#"
kind = "lattice"
[lattice]
universe = ["a"]
rules = [{ when = [], then = ["a"] }]
run = ["lfp"]
[lattice.expect]
lfp = []
"#,
    );
    let out = aperture(&["suite"], &[&dir]);
    assert_eq!(out.status.code(), Some(1));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["summary"]["fail"], 1);
    assert_eq!(value["reports"][0]["checks"][0]["name"], "lfp");
    assert_eq!(value["reports"][0]["checks"][0]["status"], "fail");
}

#[test]
fn infeasible_greedy_exits_one() {
    let out = aperture(
        &["run"],
        &[&scenarios_dir().join("extras").join("greedy-infeasible.toml")],
    );
    assert_eq!(out.status.code(), Some(1));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["checks"][0]["status"], "infeasible");
}

#[test]
fn malformed_file_exits_two() {
    let dir = std::env::temp_dir().join("aperture-malformed");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let path = write_scenario(&dir, "broken.toml", "kind = \"lattice\"\nnot really toml [");
    let out = aperture(&["run"], &[&path]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_two() {
    let out = aperture(&["run"], &[Path::new("/definitely/not/here.toml")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_directory_exits_two() {
    let dir = std::env::temp_dir().join("aperture-empty-suite");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let out = aperture(&["suite"], &[&dir]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn raw_relation_requires_flag() {
    let path = scenarios_dir().join("extras").join("gl-reflexive.toml");
    let without = aperture(&["run"], &[&path]);
    assert_eq!(without.status.code(), Some(2));
    let with = aperture(&["run", "--raw-relation"], &[&path]);
    assert_eq!(with.status.code(), Some(0));
}

#[test]
fn experiment_subcommand_reports_commutation() {
    let path = scenarios_dir().join("suite").join("05-mucalc-safety.toml");
    let out = aperture(&["experiment"], &[&path]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["checks"][0]["name"], "commute_experiment");
    assert!(value["checks"][0]["data"]["equal"].is_boolean());
}

#[test]
fn text_format_renders_summary_lines() {
    let out = aperture(
        &["run", "--format", "text"],
        &[&scenarios_dir().join("suite").join("01-lattice-chain.toml")],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[pass] lfp"));
    assert!(text.contains("result: pass"));
}

#[test]
fn suite_kind_scenario_delegates_to_directory() {
    let out = aperture(&["run"], &[&scenarios_dir().join("all.toml")]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value["reports"].as_array().unwrap().len() >= 10);
}

#[test]
fn closed_false_reading_is_a_scenario_flag() {
    let dir = std::env::temp_dir().join("aperture-closed-false");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let path = write_scenario(
        &dir,
        "closed.toml",
        r#"
kind = "truth"
[truth]
sentences = { liar = "not(trans(liar))" }
trans_reading = "closed_false"
run = ["kripke"]
[truth.expect]
classify = { liar = "grounded_true" }
"#,
    );
    let out = aperture(&["run"], &[&path]);
    assert_eq!(out.status.code(), Some(0));
}
