//! End-to-end runs of the `aplab` binary.

use std::path::Path;
use std::process::{Command, Output};

use aplab::report::read_ledger;

fn aplab(ledger: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aplab"))
        .args(args)
        .arg("--out")
        .arg(ledger)
        .env("APLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

#[test]
fn critical_size_is_deterministic_and_logged() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("runs.ledger");
    let args = ["critical-size", "--modulus", "7", "--epsilon", "0.5", "--trials", "60", "--seed", "5"];
    let a = aplab(&ledger, &args);
    let b = aplab(&ledger, &args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);

    let records = read_ledger(&ledger).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].payload().unwrap(), records[1].payload().unwrap());
    assert_eq!(records[0].payload().unwrap(), String::from_utf8(a.stdout).unwrap().trim_end());
    assert_eq!(records[0].seed, 5);
    assert!(records[0].wall_time.is_some());
}

#[test]
fn seeds_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("runs.ledger");
    let run = |seed: &str| aplab(&ledger, &["khintchine", "--dim", "6", "--count", "4", "--trials", "20", "--seed", seed]).stdout;
    assert_ne!(run("1"), run("2"));
}

#[test]
fn check_reports_witness() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("runs.ledger");
    let out = aplab(&ledger, &["check", "--modulus", "5", "--epsilon", "0.6", "--differences", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rec = &read_ledger(&ledger).unwrap()[0];
    assert_eq!(rec.command, "check");
    assert_eq!(rec.results["intersective"], false);
}

#[test]
fn csv_output_has_probe_columns() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("runs.ledger");
    let out = aplab(&ledger, &["--format", "csv", "critical-size", "--modulus", "5", "--epsilon", "0.6", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("m,trials,successes,p_hat,ci_low,ci_high\n"), "{text}");
    // the ledger stays JSON lines regardless of stdout format
    assert_eq!(read_ledger(&ledger).unwrap().len(), 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("runs.ledger");
    assert_eq!(aplab(&ledger, &["check", "--modulus", "5", "--epsilon", "0.6"]).status.code(), Some(2));
    assert_eq!(aplab(&ledger, &["check", "--modulus", "9", "--k", "4", "--epsilon", "0.6", "--differences", "1"]).status.code(), Some(2));
    assert_eq!(aplab(&ledger, &["critical-size", "--modulus", "6", "--epsilon", "0.5"]).status.code(), Some(2));
    assert_eq!(aplab(&ledger, &["verify", "--corrupt"]).status.code(), Some(1));
    assert_eq!(aplab(&ledger, &["norms", "--demo", "identity", "--dim", "4"]).status.code(), Some(0));
    let recs = read_ledger(&ledger).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(!recs[0].all_pass());
    assert!(recs[0].results["failures"].as_array().is_some_and(|f| !f.is_empty()));
}
