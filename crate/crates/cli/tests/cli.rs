use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toricsod")).args(args).output().expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("JSON line")).collect()
}

fn input(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn sod_check_on_projective_line() {
    let out = run(&["sod-check", "--input", &input("p1.json"), "--window", "-1..1", "--format", "machine"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.iter().filter(|r| r["kind"] == "object").count(), 9);
    assert_eq!(recs.last().unwrap()["passed"], true);
    assert_eq!(recs[0]["inputs"]["options"]["window"], "-1..1");
}

#[test]
fn reversed_order_fails_with_status_one() {
    let out = run(&["sod-check", "--input", &input("p1.json"), "--window", "-1..1", "--order", "label-ascending"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_rejects_face_containment() {
    let out = run(&["validate", "--input", &input("bad.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/max_faces") && err.contains("contained"), "{err}");
    for good in ["p1.json", "p12.json", "f1_bundle.json", "wall_p112_f2.json", "wall_p2_refined.json"] {
        assert_eq!(run(&["validate", "--input", &input(good)]).status.code(), Some(0), "{good}");
    }
}

#[test]
fn ext_of_stratum_sheaf() {
    let out = run(&[
        "ext",
        "--input",
        &input("p1.json"),
        "--A",
        r#"{"I":[1],"p":[0,0]}"#,
        "--B",
        r#"{"I":[1],"p":[0,0]}"#,
        "--format",
        "machine",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs[1]["table"], serde_json::json!({"0": 1}));
}

#[test]
fn input_errors_exit_with_two() {
    let out = run(&["ext", "--input", &input("p1.json"), "--A", r#"{"I":[3],"p":[0,0]}"#, "--B", r#"{"a":[0,0]}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/I/0"));
    assert_eq!(run(&["validate", "--input", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["sod-check", "--input", &input("p1.json"), "--window", "2..1"]).status.code(), Some(2));
}

#[test]
fn non_finite_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a1.json");
    std::fs::write(&path, r#"{"n": 1, "max_faces": [[1]], "weights": [[0]]}"#).unwrap();
    let out = run(&["ext", "--input", path.to_str().unwrap(), "--A", r#"{"a":[0]}"#, "--B", r#"{"a":[0]}"#]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ray"));
}

#[test]
fn wall_crossing_checks() {
    let out = run(&["fm-check", "--input", &input("wall_p112_f2.json"), "--window", "-1..1"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["fm-check", "--input", &input("wall_blowup_p2.json"), "--window", "-1..1", "--format", "machine"]);
    assert_eq!(out.status.code(), Some(1));
    let recs = records(&out);
    let crepancy = recs.iter().find(|r| r["kind"] == "crepancy").unwrap();
    assert_eq!(crepancy["differences"], serde_json::json!([{"coordinate": 4, "minus": 2, "plus": 1}]));
}

#[test]
fn bundle_and_span_checks() {
    let out = run(&["bundle-check", "--input", &input("f1_bundle.json"), "--window", "-1..1", "--format", "machine"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    let summary = recs.iter().find(|r| r["kind"] == "summary").unwrap();
    assert_eq!(summary["base_euler"], serde_json::json!([[1, 2], [0, 1]]));
    let out = run(&["span-check", "--input", &input("p2.json"), "--window", "-2..2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn reports_are_deterministic_and_cache_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache = cache.to_str().unwrap();
    let args = |report: &str| -> Vec<String> {
        ["gram", "--input", &input("p12.json"), "--window", "-2..2", "--format", "machine", "--report", report]
            .iter()
            .map(|s| s.to_string())
            .collect()
    };
    let read = |p: &Path| std::fs::read(p).unwrap();
    let plain = dir.path().join("plain.jsonl");
    let a: Vec<String> = args(plain.to_str().unwrap());
    let a: Vec<&str> = a.iter().map(String::as_str).collect();
    assert_eq!(run(&a).status.code(), Some(0));

    let cold = dir.path().join("cold.jsonl");
    let c = args(cold.to_str().unwrap());
    let mut c: Vec<&str> = c.iter().map(String::as_str).collect();
    c.extend(["--cache-dir", cache]);
    run(&c);
    let warm = dir.path().join("warm.jsonl");
    let w = args(warm.to_str().unwrap());
    let mut w: Vec<&str> = w.iter().map(String::as_str).collect();
    w.extend(["--cache-dir", cache]);
    let out = run(&w);
    let err = String::from_utf8_lossy(&out.stderr);
    let hits: u64 = err.split("cache: ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(hits > 0, "{err}");
    assert_eq!(read(&plain), read(&cold));
    assert_eq!(read(&plain), read(&warm));

    // corrupt every entry: the report stays the same and the entries are recomputed
    for shard in std::fs::read_dir(cache).unwrap() {
        for entry in std::fs::read_dir(shard.unwrap().path()).unwrap() {
            std::fs::write(entry.unwrap().path(), b"{not json").unwrap();
        }
    }
    let out = run(&w);
    assert!(String::from_utf8_lossy(&out.stderr).contains("recomputed"));
    assert_eq!(read(&plain), read(&warm));
}
