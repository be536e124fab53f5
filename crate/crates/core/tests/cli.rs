use std::path::PathBuf;
use std::process::Command;

use star_orienteer::cli::{parse_json_goals, run, EXIT_DATA, EXIT_OK, EXIT_USAGE};

fn parkville() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data/parkville.json")
        .display()
        .to_string()
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("star-orienteer").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn goal_ids(table: &str) -> Vec<String> {
    table
        .lines()
        .filter(|l| l.starts_with("v_g"))
        .map(|l| l.split_whitespace().nth(2).unwrap().to_owned())
        .collect()
}

fn write_temp(json: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), json).unwrap();
    f
}

#[test]
fn solve_soft_budget_table() {
    let g = parkville();
    let (code, out, err) = invoke(&[
        "solve",
        "--graph",
        &g,
        "--budget",
        "200",
        "--delta",
        "50",
        "-k",
        "3",
        "--objective",
        "meeting_room",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(goal_ids(&out), ["102", "260", "204"]);
    assert!(err.is_empty());
}

#[test]
fn solve_covid_hard_budget() {
    let g = parkville();
    let (code, out, _) = invoke(&[
        "solve",
        "--graph",
        &g,
        "--factor",
        "covid",
        "--budget",
        "200",
        "-k",
        "3",
        "--objective",
        "meeting_room",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(goal_ids(&out), ["110", "105", "104"]);
    assert!(out.contains("126") && out.contains("111") && out.contains("93"));
}

#[test]
fn delta_zero_matches_default() {
    let g = parkville();
    let base = [
        "solve",
        "--graph",
        &g,
        "--budget",
        "200",
        "--objective",
        "meeting_room",
    ];
    let mut with_delta = base.to_vec();
    with_delta.extend(["--delta", "0"]);
    assert_eq!(invoke(&base), invoke(&with_delta));
}

#[test]
fn json_output_round_trips() {
    let g = parkville();
    let (code, out, _) = invoke(&[
        "solve",
        "--graph",
        &g,
        "--budget",
        "200",
        "--delta",
        "50",
        "--objective",
        "meeting_room",
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_OK);
    let goals = parse_json_goals(&out).unwrap();
    assert_eq!(goals.node_ids(), ["102", "260", "204"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["query"]["delta"], 50.0);
    assert_eq!(v["goals"][0]["rank"], 1);
}

#[test]
fn whitelist_restricts_candidates() {
    let g = parkville();
    let (code, out, _) = invoke(&[
        "solve",
        "--graph",
        &g,
        "--budget",
        "200",
        "--objective",
        "meeting_room",
        "--only",
        "104",
        "--only",
        "110",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(goal_ids(&out), ["104", "110"]);

    let (code, _, err) = invoke(&[
        "solve",
        "--graph",
        &g,
        "--budget",
        "200",
        "--objective",
        "meeting_room",
        "--only",
        "220",
    ]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("unknown node: 220"), "{err}");
}

#[test]
fn start_override_must_match() {
    let g = parkville();
    let ok = invoke(&[
        "solve",
        "--graph",
        &g,
        "--start",
        "220",
        "--budget",
        "200",
        "--objective",
        "meeting_room",
    ]);
    assert_eq!(ok.0, EXIT_OK);
    let (code, _, err) = invoke(&[
        "solve",
        "--graph",
        &g,
        "--start",
        "104",
        "--budget",
        "200",
        "--objective",
        "meeting_room",
    ]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("start"));
}

#[test]
fn usage_errors_exit_one() {
    let g = parkville();
    assert_eq!(invoke(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(
        invoke(&["solve", "--graph", &g, "--objective", "meeting_room"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        invoke(&[
            "solve",
            "--graph",
            &g,
            "--budget",
            "200",
            "--objective",
            "x",
            "--bogus"
        ])
        .0,
        EXIT_USAGE
    );
    let (code, _, err) = invoke(&[
        "solve",
        "--graph",
        &g,
        "--budget",
        "200",
        "--delta",
        "50",
        "--limit",
        "220",
        "--objective",
        "meeting_room",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("exceeds the limit"));
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("solve") && out.contains("validate") && out.contains("bench"));
}

#[test]
fn data_errors_exit_two() {
    let g = parkville();
    let (code, _, err) = invoke(&[
        "solve",
        "--graph",
        &g,
        "--budget",
        "200",
        "--objective",
        "toilet",
    ]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("unknown objective"));
    let (code, _, err) = invoke(&[
        "solve",
        "--graph",
        "/nonexistent/graph.json",
        "--budget",
        "1",
        "--objective",
        "x",
    ]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("cannot read"));
    let (code, _, err) = invoke(&[
        "solve",
        "--graph",
        &g,
        "--budget",
        "200",
        "--objective",
        "meeting_room",
        "--format",
        "geojson",
    ]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("coordinates"));
}

#[test]
fn validate_reports_violations() {
    let g = parkville();
    let (code, out, _) = invoke(&["validate", "--graph", &g]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("start 220, 6 leaves"));

    let broken = write_temp(
        r#"{"start": "220", "nodes": [
            {"id": "220", "cost": 10},
            {"id": "104", "cost": -5},
            {"id": "105", "cost": 1}, {"id": "105", "cost": 2}]}"#,
    );
    let (code, out, err) = invoke(&["validate", "--graph", broken.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_DATA);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3, "{out}");
    assert!(lines[0].starts_with("self-edge"));
    assert!(lines[1].starts_with("negative cost"));
    assert!(lines[2].starts_with("duplicate id"));
    assert!(err.contains("3 violation"));
}

#[test]
fn validate_flags_bad_rewards_and_warns_on_unknown_keys() {
    let f = write_temp(
        r#"{"start": "s", "extra": 1, "nodes": [{"id": "a", "cost": 1, "rewards": {"t": "lots"}}]}"#,
    );
    let (code, out, err) = invoke(&["validate", "--graph", f.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_DATA);
    assert!(out.contains("invalid reward") && out.contains("node a"));
    assert!(err.contains("warning: ignoring unknown top-level key \"extra\""));
}

#[test]
fn malformed_file_is_data_error() {
    let f = write_temp("{ not json");
    assert_eq!(
        invoke(&["validate", "--graph", f.path().to_str().unwrap()]).0,
        EXIT_DATA
    );
}

#[test]
fn infinite_rewards_and_slack() {
    let f = write_temp(
        r#"{"start": "s", "nodes": [
            {"id": "a", "cost": 900, "rewards": {"t": "inf"}},
            {"id": "b", "cost": 1, "rewards": {"t": 5}}]}"#,
    );
    let p = f.path().to_str().unwrap();
    let (code, out, _) = invoke(&[
        "solve",
        "--graph",
        p,
        "--budget",
        "10",
        "--delta",
        "inf",
        "--objective",
        "t",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(goal_ids(&out), ["a", "b"]);
    assert!(out.contains("inf"));
}

#[test]
fn bench_subcommand() {
    let (code, out, _) = invoke(&[
        "bench",
        "--sizes",
        "10,100",
        "-k",
        "2",
        "--repetitions",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(
        invoke(&["bench", "--sizes", "10", "--repetitions", "0"]).0,
        EXIT_USAGE
    );
    let (code, out, _) = invoke(&["bench", "--sizes", "50", "--repetitions", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("median"));
}

#[test]
fn binary_exit_codes_and_streams() {
    let bin = env!("CARGO_BIN_EXE_star-orienteer");
    let g = parkville();
    let ok = Command::new(bin)
        .args([
            "solve",
            "--graph",
            &g,
            "--budget",
            "200",
            "--objective",
            "meeting_room",
            "--format",
            "dot",
        ])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("digraph"));

    let bad = Command::new(bin).arg("nope").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    assert!(bad.stdout.is_empty());
    assert!(!bad.stderr.is_empty());
}
