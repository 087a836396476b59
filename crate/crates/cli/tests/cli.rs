use std::process::{Command, Output};

use serde_json::Value;

fn triquad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triquad"))
        .args(args)
        .output()
        .expect("run triquad")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn verify_anchor_pair() {
    let out = triquad(&["verify", "17", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "verified");
    assert_eq!(v["m"], 7);
    assert_eq!(v["h2"]["K"], 2);
    assert_eq!(v["case"]["theorem"], "NonResidue");
}

#[test]
fn classify_units_h2() {
    let v = json(&triquad(&["classify", "41", "7"]));
    assert_eq!(v["norm_eps2p"], -1);
    assert_eq!(v["legendre_pq"], -1);

    let v = json(&triquad(&["units", "41", "7"]));
    let gens = v.as_array().unwrap();
    assert_eq!(gens.len(), 7);
    assert!(gens.iter().all(|g| g["coords"].is_object() && g["word"].is_object()));

    let v = json(&triquad(&["h2", "41", "7"]));
    assert_eq!(v["m"], 6);
    assert_eq!(v["h2k_kuroda"], 2);
    assert_eq!(v["h2"]["2p"], 4);
}

#[test]
fn text_output() {
    let out = triquad(&["verify", "41", "7", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("status  verified"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn scan_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = triquad(&[
        "scan", "--pmax", "50", "--qmax", "50", "--format", "csv", "--jobs", "2", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[0].starts_with("17,7,"));
    assert!(rows.iter().all(|r| r.ends_with(",verified")));
}

#[test]
fn scan_json_is_ordered_and_timed_only_on_request() {
    let v = json(&triquad(&["scan", "--pmax", "41", "--qmax", "31"]));
    let pairs: Vec<(u64, u64)> = v["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["pair"]["p"].as_u64().unwrap(), r["pair"]["q"].as_u64().unwrap()))
        .collect();
    let mut sorted = pairs.clone();
    sorted.sort();
    assert_eq!(pairs, sorted);
    assert!(v["records"][0].get("wall_time_ms").is_none());

    let v = json(&triquad(&["verify", "17", "7", "--timings"]));
    assert!(v["wall_time_ms"].is_u64());
}

#[test]
fn usage_errors() {
    for args in [
        &["verify", "13", "7"][..],
        &["verify", "17", "11"],
        &["verify", "17"],
        &["frobnicate"],
        &["verify", "17", "7", "--precision-bits", "8192"],
    ] {
        assert_eq!(triquad(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(triquad(&["--help"]).status.code(), Some(0));
}

#[test]
fn resource_guard_exit_code() {
    let out = triquad(&["verify", "17", "7", "--quad-bound", "100"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["status"], "resource-guard");
}
