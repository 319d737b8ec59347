use std::path::PathBuf;
use std::process::{Command, Output};

fn db() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ecdata")
}

fn shavis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shavis"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn scan_reports_the_28042_pair() {
    let db = db();
    let o = shavis(&["scan", "--db", db.to_str().unwrap(), "--from", "28042", "--to", "28042", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = rows.as_array().unwrap();
    let row = rows
        .iter()
        .find(|r| r["labelE"] == "28042a1" && r["labelF"] == "28042b1" && r["q"] == 3)
        .expect("28042a1/28042b1 at q = 3");
    assert_eq!(row["rhs_valuations"]["sha"], 2);
    assert_eq!(row["checklist"]["10_heegner_field"]["status"], "verified");
}

#[test]
fn scan_without_curves_in_range_is_empty() {
    let db = db();
    let o = shavis(&["scan", "--db", db.to_str().unwrap(), "--from", "1", "--to", "10", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "[]");
}

#[test]
fn config_errors_exit_2() {
    let o = shavis(&["scan", "--db", "/nonexistent/curves", "--from", "11", "--to", "11"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error:"));

    let db = db();
    let d = db.to_str().unwrap();
    assert_eq!(shavis(&["scan", "--db", d, "--from", "20", "--to", "10"]).status.code(), Some(2));
    assert_eq!(shavis(&["scan", "--db", d, "--bound-cap", "0"]).status.code(), Some(2));
    assert_eq!(shavis(&["scan", "--db", d, "--policy", "coprime"]).status.code(), Some(2));
    assert_eq!(shavis(&["scan", "--from", "11"]).status.code(), Some(2));
    assert_eq!(shavis(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn policies_are_accepted() {
    let db = db();
    let d = db.to_str().unwrap();
    for extra in [&["--policy", "good"][..], &["--policy", "coprime", "--coprime-to", "6"][..]] {
        let mut args = vec!["scan", "--db", d, "--from", "28042", "--to", "28042", "--format", "json"];
        args.extend_from_slice(extra);
        let o = shavis(&args);
        assert_eq!(o.status.code(), Some(0), "{extra:?}: {}", stderr(&o));
        assert!(stdout(&o).contains("\"q\": 3"), "{extra:?}");
    }
}

#[test]
fn check_pair_variants() {
    let db = db();
    let d = db.to_str().unwrap();

    let o = shavis(&["check-pair", "28042a1", "28042B1", "--db", d]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("q = 3:"));

    let o = shavis(&["check-pair", "28042a1", "28042b1", "--q", "5", "--db", d, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["note"].as_str().unwrap().contains("does not divide"));
    assert_eq!(v["rows"].as_array().unwrap().len(), 0);

    let o = shavis(&["check-pair", "11a1", "11a1", "--db", d]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("every compared trace agrees"), "{}", stderr(&o));

    let o = shavis(&["check-pair", "28042a1", "28042z9", "--db", d]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown curve label"));

    let o = shavis(&["check-pair", "11a1", "14a1", "--db", d]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_pair_without_odd_prime() {
    let db = db();
    let d = db.to_str().unwrap();
    let o = shavis(&["check-pair", "28042a1", "28042c1", "--db", d, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let modulus = v["congruence"]["modulus"].as_u64().unwrap();
    assert!(modulus.is_power_of_two(), "{modulus}");
    assert!(v["note"].as_str().unwrap().starts_with("no odd congruence prime"));
}

#[test]
fn cache_directory_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let db = db();
    let args = [
        "scan",
        "--db",
        db.to_str().unwrap(),
        "--from",
        "28042",
        "--to",
        "28042",
        "--format",
        "json",
        "--cache",
        dir.path().to_str().unwrap(),
    ];
    let first = shavis(&args);
    assert_eq!(first.status.code(), Some(0));
    let cache = dir.path().join(shavis_cli::CACHE_FILE);
    assert!(cache.exists());
    let second = shavis(&args);
    assert_eq!(stdout(&first), stdout(&second));

    std::fs::write(&cache, "not a cache line\n").unwrap();
    let third = shavis(&args);
    assert_eq!(third.status.code(), Some(0), "{}", stderr(&third));
    assert_eq!(stdout(&first), stdout(&third));
}

#[test]
fn selftest_exit_codes() {
    let o = shavis(&["cohomology-selftest", "--seed", "3", "--instances", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("failures: 0"));

    let o = shavis(&["cohomology-selftest", "--instances", "0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["failures"], 0);

    let o = shavis(&[
        "cohomology-selftest",
        "--seed",
        "7",
        "--instances",
        "20",
        "--inject-fault",
        "corrupt-connecting-map",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--seed 7"), "{}", stderr(&o));
}

#[test]
fn in_process_matches_binary() {
    let db = db();
    let args = ["shavis", "scan", "--db", db.to_str().unwrap(), "--from", "11", "--to", "400", "--format", "json"];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(shavis_cli::run(args, &mut out, &mut err), 0);
    let o = shavis(&args[1..]);
    assert_eq!(out, o.stdout);
}
