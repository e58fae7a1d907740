//! End-to-end tests of the `bsp` binary: flag validation and exit codes,
//! artifact files, stdout formats, and byte-level determinism across reruns
//! and thread counts. Table runs here use tiny desk scales so the whole
//! file stays fast; full-scale numbers are covered by the core crate's
//! acceptance suite.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsp")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn help_lists_every_subcommand_and_exits_zero() {
    let out = bsp(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for sub in ["table1", "table2", "table3", "table4", "audit", "lts", "screen", "locate"] {
        assert!(text.contains(sub), "--help does not mention {sub}:\n{text}");
    }
    assert_eq!(bsp(&["--version"]).status.code(), Some(0));
}

#[test]
fn flag_errors_exit_one() {
    // Unknown subcommands and malformed flags are parse errors.
    assert_eq!(bsp(&["table9"]).status.code(), Some(1));
    assert_eq!(bsp(&["table1", "--no-such-flag"]).status.code(), Some(1));
    // Domain errors on otherwise well-formed flags.
    for args in [
        &["table1", "--scale", "0"][..],
        &["table1", "--scale", "1.5"],
        &["table1", "--threads", "0"],
        &["table4", "--p", "10"],      // below the 25 every method keeps
        &["table4", "--p", "20000"],   // above the dimension cap
        &["table4", "--p", "100", "--full"],
        &["screen", "--p", "10"],
    ] {
        let out = bsp(args);
        assert_eq!(out.status.code(), Some(1), "expected flag error for {args:?}");
        assert!(!stderr(&out).is_empty(), "no error message for {args:?}");
    }
}

#[test]
fn sub_replication_scale_exits_one() {
    let out = bsp(&["table1", "--reps", "5", "--scale", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("below one replication"), "stderr: {}", stderr(&out));
}

#[test]
fn table1_writes_artifacts_and_prints_verdicts() {
    let dir = TempDir::new().unwrap();
    let out = bsp(&["table1", "--scale", "0.002", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("table1: 20 replications per cell"), "{text}");
    assert!(text.contains("cells within tolerance"), "{text}");
    assert!(text.contains("note: desk-scale run"), "{text}");

    let csv = read(dir.path(), "table1.csv");
    assert!(csv.starts_with("label,method,replications,failures,mse,"));
    // 18 cells × 3 methods + header.
    assert_eq!(csv.lines().count(), 55);
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "table1.json")).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 18);
}

#[test]
fn csv_format_prints_the_artifact_itself() {
    let dir = TempDir::new().unwrap();
    let out = bsp(&[
        "table2",
        "--scale",
        "0.001",
        "--format",
        "csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), read(dir.path(), "table2.csv"));
}

#[test]
fn reruns_and_thread_counts_give_identical_artifacts() {
    let run = |extra: &[&str]| {
        let dir = TempDir::new().unwrap();
        let mut args = vec!["table3", "--scale", "0.001", "--out", dir.path().to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = bsp(&args);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
        (read(dir.path(), "table3.csv"), read(dir.path(), "table3.json"), stdout(&out))
    };
    let base = run(&[]);
    let rerun = run(&[]);
    let one_thread = run(&["--threads", "1"]);
    let two_threads = run(&["--threads", "2"]);
    assert_eq!(base, rerun, "rerun differs");
    assert_eq!(base, one_thread, "--threads 1 differs");
    assert_eq!(base, two_threads, "--threads 2 differs");
}

#[test]
fn different_seeds_give_different_artifacts() {
    let run = |seed: &str| {
        let dir = TempDir::new().unwrap();
        let out = bsp(&[
            "table1",
            "--scale",
            "0.002",
            "--seed",
            seed,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        read(dir.path(), "table1.csv")
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn table4_single_dimension_runs() {
    let dir = TempDir::new().unwrap();
    let out = bsp(&[
        "table4",
        "--p",
        "30",
        "--scale",
        "0.01",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let csv = read(dir.path(), "table4.csv");
    assert!(csv.contains("p=30,lar,"), "{csv}");
    assert!(csv.contains("p=30,better,"), "{csv}");
}

#[test]
fn audit_reports_both_objectives() {
    let dir = TempDir::new().unwrap();
    let out = bsp(&["audit", "--scale", "0.002", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("kolmogorov: gap "), "{text}");
    assert!(text.contains("likelihood: gap "), "{text}");

    let csv = read(dir.path(), "audit.csv");
    assert_eq!(csv.lines().count(), 3, "{csv}");
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "audit.json")).unwrap();
    for key in ["kolmogorov", "likelihood"] {
        assert_eq!(json[key]["replications"], 20, "{key} block missing or wrong");
    }
}

#[test]
fn lts_oneshot_writes_fit() {
    let dir = TempDir::new().unwrap();
    let out = bsp(&["lts", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "lts.json")).unwrap();
    assert_eq!(json["kept_rows"].as_array().unwrap().len(), 11);
    assert_eq!(json["coefficients"].as_array().unwrap().len(), 2);
    assert!(json["all_kept_rows_clean"].is_boolean());
}

#[test]
fn screen_oneshot_reports_all_three_methods() {
    let dir = TempDir::new().unwrap();
    let out = bsp(&["screen", "--p", "60", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "screen.json")).unwrap();
    for method in ["lar", "sis"] {
        assert_eq!(json[method]["selected"].as_array().unwrap().len(), 25);
        assert!(json[method]["covers_support"].is_boolean());
    }
    let source = json["better"]["source"].as_str().unwrap();
    assert!(source == "lar" || source == "sis", "unexpected source {source}");
}

#[test]
fn locate_oneshot_reports_estimates_and_searches() {
    let dir = TempDir::new().unwrap();
    let out = bsp(&["locate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "locate.json")).unwrap();
    for key in ["median", "trimmed"] {
        assert!(json["estimates"][key].is_number(), "missing estimate {key}");
    }
    for key in ["likelihood", "kolmogorov"] {
        let block = &json["subsample_searches"][key];
        assert_eq!(block["subset"].as_array().unwrap().len(), 10);
        assert!(block["subset_clean"].is_boolean());
    }
}
