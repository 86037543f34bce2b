mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sors::cli::{run, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_OK};
use tempfile::TempDir;

use common::{random_instance, InstanceShape, THREE_NODE_PROJECT};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn sors(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("sors").chain(args.iter().copied()), &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_counts() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.json", THREE_NODE_PROJECT);
    let o = sors(&["validate", s(&f)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.stdout, "valid: 3 requirements, 2 value types, 0 warnings\n");
}

#[test]
fn validate_warns_on_strong_unknown_edge() {
    let dir = TempDir::new().unwrap();
    let text = THREE_NODE_PROJECT.replace(r#""quality": "+", "strength": 0.2"#, r#""quality": "±", "strength": 0.2"#);
    let f = write(&dir, "p.json", &text);
    let o = sors(&["validate", s(&f)]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stderr.contains("warning:"), "{}", o.stderr);
    assert!(o.stdout.ends_with("2 warnings\n"), "{}", o.stdout);
}

#[test]
fn bad_files_exit_with_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(sors(&["validate", s(&missing)]).code, EXIT_ERROR);

    let garbage = write(&dir, "g.json", "{ not json");
    let o = sors(&["solve", s(&garbage)]);
    assert_eq!(o.code, EXIT_ERROR);
    assert!(o.stderr.starts_with("error:"));

    let unknown_id = write(&dir, "u.json", &THREE_NODE_PROJECT.replace(r#""target_id": "r3""#, r#""target_id": "r9""#));
    assert_eq!(sors(&["export-lp", s(&unknown_id)]).code, EXIT_ERROR);

    assert_eq!(sors(&["solve"]).code, EXIT_ERROR);
    assert_eq!(sors(&["solve", s(&garbage), "--threads", "0"]).code, EXIT_ERROR);
}

#[test]
fn influence_table_for_type_two() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.json", THREE_NODE_PROJECT);
    let o = sors(&["influence", s(&f), "--type", "2"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines.len(), 4);
    let r1: Vec<&str> = lines[1].split_whitespace().collect();
    assert_eq!(r1, ["r1", "0.0000", "0.6000", "-0.3000"]);
    let r3: Vec<&str> = lines[3].split_whitespace().collect();
    assert_eq!(r3, ["r3", "0.0000", "0.0000", "0.0000"]);

    assert_eq!(sors(&["influence", s(&f), "--type", "7"]).code, EXIT_ERROR);
}

#[test]
fn solve_json_report() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.json", THREE_NODE_PROJECT);
    let o = sors(&["solve", s(&f)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stderr.contains("nodes explored:"));
    let report: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(report["feasible"], true);
    assert_eq!(report["solver"]["backend"], "bnb");
    assert_eq!(report["solver"]["status"], "optimal");
    let selected = report["selected"].as_array().unwrap();
    assert!(!selected.is_empty() && selected.len() <= 2);

    let ex = sors(&["solve", s(&f), "--backend", "exhaustive"]);
    assert_eq!(ex.code, EXIT_OK);
    let ex: serde_json::Value = serde_json::from_str(&ex.stdout).unwrap();
    assert_eq!(ex["selected"], report["selected"]);
    assert_eq!(ex["objective"], report["objective"]);
    assert_eq!(ex["solver"]["backend"], "exhaustive");
}

#[test]
fn solve_text_report_to_file() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.json", THREE_NODE_PROJECT);
    let out = dir.path().join("report.txt");
    let o = sors(&["solve", s(&f), "--report", "text", "-o", s(&out)]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("economic"), "{text}");
    assert!(text.contains("inclusiveness"), "{text}");
}

#[test]
fn infeasible_exit_code() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.json", &THREE_NODE_PROJECT.replace(r#"{"2": 3}"#, r#"{"2": 100}"#));
    let o = sors(&["solve", s(&f)]);
    assert_eq!(o.code, EXIT_INFEASIBLE, "{}", o.stderr);
    let report: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(report["feasible"], false);
    assert_eq!(report["solver"]["status"], "infeasible");
    assert!(report["selected"].as_array().unwrap().is_empty());
    assert!(!report["violations"].as_array().unwrap().is_empty());
}

#[test]
fn node_limit_exit_code() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = random_instance(
        &mut rng,
        &InstanceShape { n: 18, kinds: 1, density: 0.2, structural: 0, alpha_range: (0.0, 0.0), integer_data: true },
    );
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.json", &common::project_json(&model));
    let o = sors(&["solve", s(&f), "--node-limit", "3"]);
    assert_eq!(o.code, EXIT_LIMIT, "{}", o.stderr);
    assert!(o.stderr.contains("limit"));
}

#[test]
fn export_lp_to_stdout_and_file() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.json", THREE_NODE_PROJECT);
    let o = sors(&["export-lp", s(&f)]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.starts_with("Maximize\n"));
    assert!(o.stdout.ends_with("End\n"));
    assert!(o.stdout.contains(" budget: "));
    assert!(o.stdout.contains(" social_2: "));

    let lp = dir.path().join("m.lp");
    let to_file = sors(&["export-lp", s(&f), "-o", s(&lp)]);
    assert_eq!(to_file.code, EXIT_OK);
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&lp).unwrap(), o.stdout);
}

#[test]
fn binary_output_is_stable_across_threads() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let model = random_instance(
        &mut rng,
        &InstanceShape { n: 14, kinds: 2, density: 0.25, structural: 3, alpha_range: (0.1, 0.4), integer_data: true },
    );
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "p.json", &common::project_json(&model));
    let exe = env!("CARGO_BIN_EXE_sors");
    let runs: Vec<_> = ["1", "4"]
        .iter()
        .map(|t| Command::new(exe).args(["solve", s(&f), "--threads", t]).output().unwrap())
        .collect();
    assert_eq!(runs[0].status.code(), runs[1].status.code());
    assert_eq!(runs[0].stdout, runs[1].stdout);
}
