use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn multiwit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiwit")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("multiwit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn degrees(v: &Value) -> Vec<(String, u64)> {
    v["degrees"].as_object().unwrap().iter().map(|(k, n)| (k.clone(), n.as_u64().unwrap())).collect()
}

#[test]
fn octahedron_h_witness_degrees() {
    let v = json_of(&multiwit(&["fixture", "octahedron-h", "witness"]));
    let want = [("0011", 3), ("0101", 4), ("0110", 5), ("1001", 5), ("1010", 6), ("1100", 7)];
    assert_eq!(degrees(&v), want.iter().map(|(k, n)| (k.to_string(), *n)).collect::<Vec<_>>());
}

#[test]
fn richardson_segre_degree() {
    let v = json_of(&multiwit(&["segre", "--fixture", "richardson"]));
    assert_eq!(v["segre"], 450);
}

#[test]
fn six_forms_class() {
    let v = json_of(&multiwit(&["class", "--fixture", "six-forms"]));
    assert_eq!(v["class"]["003"], 160);
    assert_eq!(v["class"]["210"], 6480);
    let v = json_of(&multiwit(&["class", "--degrees", "11;11", "--nvec", "11"]));
    assert_eq!(v["mbezout"], 2);
}

#[test]
fn malformed_input_exits_2_without_output() {
    let input = scratch("bad.txt");
    let output = scratch("bad-out.json");
    std::fs::write(&input, "group x;\nf = x^2 +;\n").unwrap();
    let out = multiwit(&["witness", "-i", input.to_str().unwrap(), "-o", output.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!output.exists());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(multiwit(&["witness"]).status.code(), Some(2));
    assert_eq!(multiwit(&["witness", "--fixture", "nonesuch"]).status.code(), Some(2));
    assert_eq!(multiwit(&["witness", "--fixture", "pentad"]).status.code(), Some(2));
    assert_eq!(multiwit(&["witness", "--fixture", "cubic", "--tol-rank", "-1"]).status.code(), Some(2));
    assert_eq!(multiwit(&["bogus"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let out = multiwit(&["witness", "--fixture", "cubic", "--tol-track", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn output_is_deterministic() {
    let a = multiwit(&["witness", "--fixture", "octahedron-g", "--seed", "5"]);
    let b = multiwit(&["witness", "--fixture", "octahedron-g", "--seed", "5", "--workers", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn degrees_do_not_depend_on_seed() {
    let base = degrees(&json_of(&multiwit(&["witness", "--fixture", "octahedron-g"])));
    for seed in 2..6 {
        let s = seed.to_string();
        let v = json_of(&multiwit(&["witness", "--fixture", "octahedron-g", "--seed", &s]));
        assert_eq!(degrees(&v), base, "seed {seed}");
    }
}

#[test]
fn archive_round_trip_through_files() {
    let archive = scratch("oh.json");
    let out = multiwit(&["witness", "--fixture", "octahedron-h", "-o", archive.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v = json_of(&multiwit(&["slice", "-i", archive.to_str().unwrap(), "--group", "x"]));
    assert_eq!(v["degrees"]["0100"], 7);
    assert_eq!(v["degrees"]["0001"], 5);
    let v = json_of(&multiwit(&["member", "-i", archive.to_str().unwrap(), "--point", "0,0,0,0"]));
    assert_eq!(v["member"], false);
}

#[test]
fn cubic_refine_and_coarsen() {
    let input = scratch("c2.txt");
    std::fs::write(&input, "group p[2];\nC = p2^2 - 2*p1*p2 - p1^3 + p1;\n").unwrap();
    let path = input.to_str().unwrap();
    let v = json_of(&multiwit(&["refine", "-i", path, "--group", "p", "--split", "p1", "--target", "10"]));
    assert_eq!(v["degree"], 2);
    let v = json_of(&multiwit(&["refine", "-i", path, "--group", "0", "--split", "p1", "--target", "01"]));
    assert_eq!(v["degree"], 3);
    let v = json_of(&multiwit(&["coarsen", "--fixture", "cubic", "--merge", "x,y"]));
    assert_eq!(v["degrees"]["1"], 3);
    assert_eq!(v["reports"]["1"]["paths"]["paths"], 5);
    assert_eq!(v["reports"]["1"]["paths"]["diverged"], 2);
}

#[test]
fn decompose_and_trace() {
    let v = json_of(&multiwit(&["decompose", "--fixture", "crossing-lines"]));
    assert_eq!(v["components"].as_array().unwrap().len(), 2);
    let v = json_of(&multiwit(&["trace", "--fixture", "parallel-lines", "--part", "0"]));
    assert_eq!(v["linear"], true);
    let v = json_of(&multiwit(&["decompose", "--fixture", "richardson-four", "--entry", "122"]));
    assert_eq!(v["sizes"], serde_json::json!([2, 2, 3, 3]));
}

#[test]
fn fixture_listing() {
    let v = json_of(&multiwit(&["fixture"]));
    assert!(v["fixtures"].as_array().unwrap().iter().any(|n| n == "hyperboloid"));
    let v = json_of(&multiwit(&["fixture", "cubic"]));
    assert!(v["system"].as_str().unwrap().contains("group x"));
}
