use std::fs;
use std::path::Path;
use std::process::Command;

use modgraph::cli::{run, Status};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_modgraph");

fn fixture(name: &str) -> String {
    format!("tests/fixtures/{name}")
}

fn report(args: &[&str]) -> (Status, Value) {
    let argv = std::iter::once("modgraph").chain(args.iter().copied());
    let (r, _) = run(argv).expect("not a help request");
    let v = serde_json::to_value(&r).unwrap();
    (r.status, v)
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn golden_reports() {
    let mut seen = 0;
    for entry in fs::read_dir("tests/golden").unwrap() {
        let path = entry.unwrap().path();
        let case: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let args: Vec<&str> = case["args"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
        let (_, got) = report(&args);
        assert_eq!(got, case["report"], "{}", path.display());
        let (code, _) = exit_code(&[&args[..], &["--quiet"]].concat());
        assert_eq!(Some(code as i64), case["exit"].as_i64(), "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 15);
}

#[test]
fn worked_examples() {
    let (s, v) = report(&["genus", "genus-figure"]);
    assert_eq!(s, Status::Pass);
    assert_eq!(v["result"]["total_genus"], 9);

    let (s, v) = report(&["homs", "edge", "star:3"]);
    assert_eq!(s, Status::Pass);
    assert_eq!(v["result"]["count"], 6);

    let (s, v) = report(&["gt-check", "--lambda", "1", "--f", ""]);
    assert_eq!(s, Status::Pass);
    assert_eq!(v["result"]["relation_I"], true);
    assert_eq!(v["result"]["relation_II"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(exit_code(&["homs", "edge", "star:3", "--quiet"]).0, 0);
    assert_eq!(exit_code(&["sieve-check", "--predicate", "betti-eq-1", "--quiet"]).0, 1);
    assert_eq!(exit_code(&["graph-validate", &fixture("broken_graph.json")]).0, 1);
    assert_eq!(exit_code(&["limit", &fixture("tower_broken.json")]).0, 1);
    assert_eq!(exit_code(&["graph-validate", "no-such-graph"]).0, 2);
    assert_eq!(exit_code(&["limit", &format!("quotients:{}", fixture("not_a_group.json"))]).0, 2);
    assert_eq!(exit_code(&["gt-check", "--lambda", "2"]).0, 2);
    assert_eq!(exit_code(&["zhat", "3", "--levels", "6"]).0, 2);
    assert_eq!(exit_code(&["sieve-check", "--predicate", "betti-le-7"]).0, 2);
    assert_eq!(exit_code(&["frobnicate"]).0, 2);
    assert_eq!(exit_code(&[]).0, 2);
    assert_eq!(exit_code(&["--help"]).0, 0);
}

#[test]
fn output_modes() {
    let (_, quiet) = exit_code(&["genus", "edge", "--quiet"]);
    assert!(quiet.is_empty());
    let (_, compact) = exit_code(&["genus", "edge", "--json"]);
    assert_eq!(compact.trim().lines().count(), 1);
    let (_, pretty) = exit_code(&["genus", "edge"]);
    assert!(pretty.lines().count() > 1);
    let a: Value = serde_json::from_str(&compact).unwrap();
    let b: Value = serde_json::from_str(&pretty).unwrap();
    assert_eq!(a, b);
    assert!(a.get("timing_ms").is_none());
    let (_, timed) = exit_code(&["genus", "edge", "--json", "--timing"]);
    let t: Value = serde_json::from_str(&timed).unwrap();
    assert!(t["timing_ms"].is_u64());
}

#[test]
fn nerve_and_extract_round_trip_through_files() {
    let dir = std::env::temp_dir().join(format!("modgraph-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let nerve = dir.join("nerve.json");
    let operad = dir.join("operad.json");
    let n = nerve.to_str().unwrap();
    let o = operad.to_str().unwrap();

    let (s, v) = report(&["nerve", "charge", "--max-degree", "3", "--max-arity", "3", "--out", n]);
    assert_eq!(s, Status::Pass);
    assert!(v["result"]["elements"].as_u64().unwrap() > 0);
    assert_eq!(report(&["segal-check", n]).0, Status::Pass);
    assert_eq!(report(&["horn-check", n]).0, Status::Pass);

    let (s, v) = report(&["extract", n, "--out", o]);
    assert_eq!(s, Status::Pass, "{v}");
    assert_eq!(report(&["operad-validate", o, "--max-arity", "3"]).0, Status::Pass);

    // The stored fixtures were made the same way.
    assert!(Path::new(&fixture("nerve_terminal.json")).is_file());
    assert_eq!(report(&["segal-check", &fixture("nerve_terminal.json")]).0, Status::Pass);
    assert_eq!(
        report(&["operad-validate", &fixture("extracted_charge.json"), "--max-arity", "3"]).0,
        Status::Pass
    );
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn factorize_every_map_between_two_graphs() {
    let (s, v) = report(&["factorize", "path:2", "cycle:2"]);
    assert_eq!(s, Status::Pass);
    let rows = v["result"]["factorizations"].as_array().unwrap();
    assert_eq!(rows.len(), 24);
    assert!(rows.iter().all(|r| r["recomposes"] == true));
}
