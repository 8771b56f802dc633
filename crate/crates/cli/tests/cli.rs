use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bhcycle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bhcycle")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_both_reports_equivalence() {
    let out = bhcycle(&["gen", "2", "--def", "both"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "equivalent: true");
}

#[test]
fn gen_dot_for_bh1_has_four_nodes() {
    let out = bhcycle(&["gen", "1", "--format", "dot"]);
    assert!(out.status.success());
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("graph BH1 {"));
    assert_eq!(dot.matches("[color=").count(), 4);
    assert_eq!(dot.matches(" -- ").count(), 4);
}

#[test]
fn gen_json_sizes_for_bh3() {
    let doc = stdout_json(&bhcycle(&["gen", "3", "--format", "json"]));
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 64);
    assert_eq!(doc["edges"].as_array().unwrap().len(), 3 * 64);
}

#[test]
fn gen_writes_the_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bh2.json");
    let out = bhcycle(&["gen", "2", "--def", "2", "--out", path(&file)]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(doc["n"], 2);
    assert_eq!(doc["edges"].as_array().unwrap().len(), 32);
}

#[test]
fn construct_random_instance_at_n2() {
    let out = bhcycle(&["construct", "2", "--faults", "random:3:42", "--edge", "random:0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["cycle"].as_array().unwrap().len(), 16);
    assert!(doc["through"].is_object());
}

#[test]
fn theorem_and_search_modes_agree_at_n3() {
    for mode in ["theorem", "search"] {
        let out = bhcycle(&["construct", "3", "--faults", "random:7:7", "--edge", "random:7", "--mode", mode]);
        assert_eq!(out.status.code(), Some(0), "{mode}: {}", String::from_utf8_lossy(&out.stderr));
        let doc = stdout_json(&out);
        assert_eq!(doc["cycle"].as_array().unwrap().len(), 64);
    }
}

#[test]
fn faulty_edge_is_a_precondition_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f.json");
    assert!(bhcycle(&["faults", "3", "--size", "7", "--seed", "3", "--out", path(&file)]).status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let digits = |v: &Value| v.as_array().unwrap().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",");
    let first = &doc["faults"][0];
    let edge = format!("{}-{}", digits(&first["u"]), digits(&first["v"]));
    let out = bhcycle(&["construct", "3", "--faults", path(&file), "--edge", &edge]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("faulty"));
}

#[test]
fn too_many_faults_is_a_precondition_error() {
    let out = bhcycle(&["construct", "2", "--faults", "random:4:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exhausted_budget_exits_with_four() {
    let out = Command::new(env!("CARGO_BIN_EXE_bhcycle"))
        .args(["construct", "3", "--faults", "random:7:7", "--edge", "random:7"])
        .env("BHCYCLE_NODE_LIMIT", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn constructed_cycle_verifies_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let faults = dir.path().join("f.json");
    let cycle = dir.path().join("c.json");
    assert!(bhcycle(&["faults", "3", "--size", "7", "--seed", "11", "--out", path(&faults)]).status.success());
    let out = bhcycle(&["construct", "3", "--faults", path(&faults), "--edge", "random:2", "--out", path(&cycle)]);
    assert!(out.status.success());
    assert_eq!(bhcycle(&["verify", "3", "--faults", path(&faults), "--cycle", path(&cycle)]).status.code(), Some(0));

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&cycle).unwrap()).unwrap();
    doc["cycle"].as_array_mut().unwrap().swap(3, 40);
    std::fs::write(&cycle, doc.to_string()).unwrap();
    assert_eq!(bhcycle(&["verify", "3", "--faults", path(&faults), "--cycle", path(&cycle)]).status.code(), Some(3));
}

#[test]
fn stress_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out =
            bhcycle(&["stress", "3", "--trials", "20", "--edges-per-trial", "2", "--seed", "5", "--report", path(p)]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let doc: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(doc["fault_size"], 7);
    assert_eq!(doc["constructions"], 40);
    assert_eq!(doc["passed"], 40);
    assert!(doc["failures"].as_array().unwrap().is_empty());
}

#[test]
fn counterexample_verdicts() {
    let two = stdout_json(&bhcycle(&["counterexample", "2"]));
    assert_eq!(two["is_conditional"], true);
    assert_eq!(two["fault_count"], 4);
    assert_eq!(two["absence"]["verdict"], "CONCLUSIVE_ABSENT");

    let three = stdout_json(&bhcycle(&["counterexample", "3"]));
    assert_eq!(three["fault_count"], 8);
    assert_eq!(three["absence"]["verdict"], "STRUCTURAL_ABSENT");

    assert_eq!(bhcycle(&["counterexample", "1"]).status.code(), Some(2));
}
