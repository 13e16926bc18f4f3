use std::path::PathBuf;
use std::process::{Command, Output};

fn arena(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arena")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("arena-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn tables_prints_gamma_row() {
    let o = arena(&["tables", "--schema", "s120"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "j,x,chi,gamma,delta,scalable_cap");
    let gammas: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(gammas, ["1", "2", "2", "2", "2", "2", "2", "2", "2", "3", "4", "4", "6"]);
}

#[test]
fn invalid_schema_exits_with_two() {
    let path = scratch("bad.json");
    std::fs::write(&path, r#"{"k": 12, "rows": [[5, 1]]}"#).unwrap();
    assert_eq!(arena(&["tables", "--schema", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(arena(&["tables", "--schema", "no-such-schema"]).status.code(), Some(2));
}

#[test]
fn search_single_k() {
    let o = arena(&["search", "--k", "120"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().nth(1).unwrap().starts_with("120,247/60,4.1166666"), "{out}");
    let o = arena(&["search", "--k", "120", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.to_string().contains("247/60"));
}

#[test]
fn search_reports_errors_per_row() {
    let o = arena(&["search", "--k", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("2,,,") && row.len() > 4, "{row}");
}

#[test]
fn play_and_verify_round_trip() {
    let path = scratch("unit3.json");
    let o = arena(&["play", "--presenter", "unit:3", "--algorithm", "first-fit", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary["colors_used"].as_u64().unwrap() >= 5);
    let o = arena(&["verify", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["violations"], serde_json::json!([]));
    assert_eq!(v["intervals"], summary["intervals"]);
}

#[test]
fn single_row_schema_game() {
    let o = arena(&["play", "--presenter", "schema:single:3", "--algorithm", "random-fit:4"]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary["colors_used"].as_u64().unwrap() >= 7);
    assert!(summary["certificate_colors"].as_u64().unwrap() <= 3);
}

#[test]
fn budget_exhaustion_exit_code() {
    let o = arena(&["play", "--presenter", "kt:3", "--algorithm", "first-fit", "--budget", "2"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn verify_flags_overload() {
    let path = scratch("overload.json");
    let t = r#"[
        {"id": 0, "lo": {"num": "0", "exp2": 0}, "hi": {"num": "1", "exp2": 0}, "bandwidth": "2/3", "tag": "kt", "color": 0},
        {"id": 1, "lo": {"num": "1", "exp2": 1}, "hi": {"num": "2", "exp2": 0}, "bandwidth": "1/2", "tag": "kt", "color": 0}
    ]"#;
    std::fs::write(&path, t).unwrap();
    let o = arena(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["violations"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_edge_inputs() {
    let empty = scratch("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let o = arena(&["verify", empty.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["colors"], 0);
    let junk = scratch("junk.json");
    std::fs::write(&junk, "{not json").unwrap();
    assert_eq!(arena(&["verify", junk.to_str().unwrap()]).status.code(), Some(2));
}
