//! End-to-end runs of the binary: exit codes, determinism and file round trips.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn logvoa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logvoa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identities_pass() {
    let out = logvoa(&["identities", "--max", "4"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("result: PASS"));
}

#[test]
fn fusion_of_three_fock_modules() {
    let args = ["blocks-dim", "fock:1", "fock:2", "fock:-3", "--level", "4", "--format", "json"];
    let out = logvoa(&args);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["estimate"], 1);
    assert_eq!(r["stabilized"], true);
    assert_eq!(r["levels"].as_array().unwrap().len(), 2);
    assert_eq!(r["levels"][1]["rank"].as_u64().unwrap() + 1, r["levels"][1]["window_dim"].as_u64().unwrap());
    // byte-identical on a second run
    assert_eq!(logvoa(&args).stdout, out.stdout);

    let r = json(&logvoa(&["blocks-dim", "fock:1", "fock:2", "fock:1/2", "--level", "3", "--format", "json"]));
    assert_eq!(r["estimate"], 0);
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("voa.json");
    std::fs::write(&bad, "{\n  \"l_max\": 3,\n  \"weights\": [\n}").unwrap();
    let out = logvoa(&["check-voa", "--voa", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(&format!("{}:4:", bad.display())), "{err}");
}

#[test]
fn bad_arguments_fail() {
    assert!(!logvoa(&["blocks-dim", "fock:x", "fock:1", "fock:1"]).status.success());
    assert!(!logvoa(&["blocks-dim", "fock:1", "fock:1"]).status.success());
    let out = logvoa(&["check-module", "logfock:0", "--level", "2", "--l-max", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("depth"));
}

#[test]
fn exported_files_check_out() {
    let dir = tempfile::tempdir().unwrap();
    let voa = dir.path().join("voa.json");
    let module = dir.path().join("module.json");
    assert!(logvoa(&["export", "--l-max", "4", "--out", path(&voa)]).status.success());
    let out = logvoa(&["export", "logfock:1/2", "--l-max", "4", "--level", "2", "--out", path(&module)]);
    assert!(out.status.success());

    let out = logvoa(&["check-voa", "--voa", path(&voa), "--seed-sweep", "1", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["graded_dims"], serde_json::json!([1, 1, 2, 3, 5]));

    let out = logvoa(&["check-module", path(&module), "--voa", path(&voa), "--seed-sweep", "1", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let r = json(&out);
    assert_eq!(r["depth"], 1);
    assert_eq!(r["h"], "1/8");
    assert_eq!(r["double_dual_matches"], true);
}

#[test]
fn extracted_tables_round_trip_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let tables = dir.path().join("tables");
    let small = ["--l-max", "4", "--level", "2"];
    let triple = ["logfock:1", "fock:1", "logfock:-2"];

    let mut args = vec!["extract-intw"];
    args.extend(triple);
    args.extend(small);
    args.extend(["--tables", path(&tables), "--format", "json"]);
    let out = logvoa(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let r = json(&out);
    let ops = r["operators"].as_array().unwrap();
    assert!(!ops.is_empty());
    assert!(ops.iter().any(|o| o["log_entries"].as_u64().unwrap() > 0));

    let table = tables.join("operator_0.json");
    let mut args = vec!["roundtrip"];
    args.extend(triple);
    args.extend(small);
    args.extend(["--intw", path(&table), "--format", "json"]);
    let out = logvoa(&args);
    assert!(out.status.success());
    for row in json(&out)["instances"].as_array().unwrap() {
        assert_eq!(row["max_residual"], "0");
    }

    // Change one logarithmic coefficient: the table no longer comes from a block.
    let mut file: Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    let log_table = file["tables"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|t| t["n"] == 1)
        .expect("an n = 1 table");
    let cell = log_table["blocks"][0]["matrix"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .flat_map(|row| row.as_array_mut().unwrap().iter_mut())
        .flat_map(|cell| cell.as_array_mut().unwrap().iter_mut())
        .find(|v| *v != "0")
        .unwrap();
    *cell = Value::String("12345".into());
    std::fs::write(&table, serde_json::to_string(&file).unwrap()).unwrap();
    let out = logvoa(&args);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["instances"]
        .as_array()
        .unwrap()
        .iter()
        .any(|row| row["passed"] == false && row["max_residual"] != "0"));
}

#[test]
fn report_goes_to_the_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let out = logvoa(&["identities", "--max", "2", "--out", path(&report)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&report).unwrap().contains("result: PASS"));
}
