use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn carpenter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carpenter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const WORKED: &str = r#"{"prefix":["2/5","2/5","2/5","2/5","2/5"],"tail":{"kind":"zero"}}"#;

#[test]
fn check_reports_fractional_difference() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", r#"{"prefix":["1/3"],"tail":{"kind":"zero"}}"#);
    let out = carpenter(&["check", &s]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["verdict"], "Infeasible");
    assert_eq!(v["case"]["diff"], "1/3");

    let s = write(dir.path(), "ok.json", r#"{"prefix":[],"tail":{"kind":"constant","c":"2/5"}}"#);
    let out = carpenter(&["check", &s]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["case"]["kind"], "NonsummableA");
}

#[test]
fn construct_two_vectors_matches_hand_values() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", WORKED);
    let trace = dir.path().join("trace.json");
    let out = carpenter(&["construct", &s, "--vectors", "2", "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let r = |x: f64| x.sqrt();
    let expected = [
        vec![(1, r(0.4)), (2, r(0.3)), (3, -r(0.3))],
        vec![(2, r(0.1)), (3, r(0.1)), (4, r(0.4)), (5, r(0.4))],
    ];
    let vectors = v["vectors"].as_array().unwrap();
    assert_eq!(vectors.len(), 2);
    for (vec, want) in vectors.iter().zip(&expected) {
        let support = vec["support"].as_array().unwrap();
        assert_eq!(support.len(), want.len());
        for (entry, &(k, x)) in support.iter().zip(want) {
            assert_eq!(entry[0].as_u64().unwrap(), k);
            assert!((entry[1].as_f64().unwrap() - x).abs() < 1e-12);
        }
    }
    let t: Value = serde_json::from_str(&fs::read_to_string(trace).unwrap()).unwrap();
    assert_eq!(t["sigma"][0], "3/5");
    assert_eq!(t["aCoef"][0], "3/10");
    assert_eq!(t["minS"][0], 3);
}

#[test]
fn construct_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (i, spec) in [
        r#"{"prefix":[],"tail":{"kind":"constant","c":"3/5"}}"#,
        r#"{"prefix":["3/10","1/5"],"tail":{"kind":"one_minus_geometric","c":"1/4","r":"1/2"}}"#,
        r#"{"prefix":["9/10"],"tail":{"kind":"constant","c":"2/5"}}"#,
    ]
    .iter()
    .enumerate()
    {
        let s = write(dir.path(), &format!("s{i}.json"), spec);
        let rep = dir.path().join(format!("r{i}.json"));
        let rep = rep.to_str().unwrap();
        let out = carpenter(&["construct", &s, "--vectors", "6", "--out", rep]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let out = carpenter(&["verify", "--rep", rep, "--spec", &s, "--vectors", "6"]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json(&out)["pass"], true);
    }
}

#[test]
fn verify_rejects_wrong_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", WORKED);
    let rep = write(
        dir.path(),
        "r.json",
        r#"{"form":"Frame","vectors":[{"support":[[1,1.0]]},{"support":[[2,1.0]]}]}"#,
    );
    let out = carpenter(&["verify", "--rep", &rep, "--spec", &s]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn mode_mismatch_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", r#"{"prefix":["1/2","1/2"],"tail":{"kind":"geometric","c":"1/8","r":"1/2"}}"#);
    let out = carpenter(&["construct", &s, "--mode", "nonsummable"]);
    assert_eq!(out.status.code(), Some(2));
    let out = carpenter(&["construct", &s, "--mode", "summable"]);
    assert_eq!(out.status.code(), Some(2), "sum is 5/4, so infeasible");
    let s = write(dir.path(), "n.json", r#"{"prefix":[],"tail":{"kind":"constant","c":"2/5"}}"#);
    let out = carpenter(&["construct", &s, "--mode", "summable"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not apply"));
}

#[test]
fn oracle_reports_no_violations() {
    let out = carpenter(&["oracle", "--dim", "4", "--trials", "1000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["violations"], 0);
    let out = carpenter(&["oracle", "--dim", "3", "--trials", "50", "--exact", "--kind", "schur"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn schur_horn_two_by_two() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    let out = carpenter(&["schur-horn", "--spectrum", "1,0", "--target", "1/2,1/2", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for row in v["conjugated"].as_array().unwrap() {
        for x in row.as_array().unwrap() {
            assert!((x.as_f64().unwrap() - 0.5).abs() < 1e-12);
        }
    }
    assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 2);
    let out = carpenter(&["schur-horn", "--spectrum", "1,0", "--target", "1,1/2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn field_writes_manifest_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cells = r#"[
        {"cell":"a","spec":{"prefix":[],"tail":{"kind":"constant","c":"2/5"}}},
        {"cell":"b","spec":{"prefix":["1/2","1/2"],"tail":{"kind":"zero"}}},
        {"cell":"c","spec":{"prefix":[],"tail":{"kind":"constant","c":"2/5"}}}
    ]"#;
    let input = write(dir.path(), "cells.json", cells);
    let o1 = dir.path().join("o1");
    let o2 = dir.path().join("o2");
    let out = carpenter(&["field", "--input", &input, "--vectors", "4", "--out", o1.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = carpenter(&["field", "--input", &input, "--vectors", "4", "--out", o2.to_str().unwrap(), "--parallel"]);
    assert_eq!(out.status.code(), Some(0));
    let m1 = fs::read_to_string(o1.join("manifest.json")).unwrap();
    assert_eq!(m1, fs::read_to_string(o2.join("manifest.json")).unwrap());
    let manifest: Value = serde_json::from_str(&m1).unwrap();
    assert_eq!(manifest["cells"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["partition"].as_object().unwrap().len(), 2);
    for entry in manifest["cells"].as_array().unwrap() {
        let f = entry["file"].as_str().unwrap();
        assert_eq!(fs::read(o1.join(f)).unwrap(), fs::read(o2.join(f)).unwrap());
    }
    let ra: Value = serde_json::from_str(&fs::read_to_string(o1.join("cells/1.json")).unwrap()).unwrap();
    let rc: Value = serde_json::from_str(&fs::read_to_string(o1.join("cells/3.json")).unwrap()).unwrap();
    assert_eq!(ra["rep"], rc["rep"]);
}

#[test]
fn field_names_infeasible_cell() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "cells.json",
        r#"[{"cell":"ok","spec":{"prefix":["1"],"tail":{"kind":"zero"}}},{"cell":"bad","spec":{"prefix":["1/3"],"tail":{"kind":"zero"}}}]"#,
    );
    let out = carpenter(&["field", "--input", &input, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad"));
}

#[test]
fn si_round_trip_and_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let good = r#"{"d":1,"window":[[0],[1],[2]],"fibers":[
        {"xi":[0.25],"values":["1/2","1/2","0"]},
        {"xi":[0.5],"values":["1","0","0"]}]}"#;
    let input = write(dir.path(), "sigma.json", good);
    let range = dir.path().join("range.json");
    let ext = dir.path().join("ext.json");
    let out = carpenter(&[
        "si",
        "--input",
        &input,
        "--out",
        range.to_str().unwrap(),
        "--extract",
        ext.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let e: Value = serde_json::from_str(&fs::read_to_string(ext).unwrap()).unwrap();
    assert!((e["fibers"][0]["values"][1].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let bad = r#"{"d":1,"window":[[0]],"fibers":[{"xi":[0.75],"values":["1/3"]}]}"#;
    let input = write(dir.path(), "bad.json", bad);
    let out = carpenter(&["si", "--input", &input, "--out", range.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("xi=(0.75)"));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(carpenter(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(carpenter(&["construct"]).status.code(), Some(64));
    assert_eq!(carpenter(&["oracle", "--dim", "0"]).status.code(), Some(64));
    assert_eq!(carpenter(&["--help"]).status.code(), Some(0));
    assert_eq!(carpenter(&["check", "/nonexistent/spec.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", r#"{"prefix":["3/2"],"tail":{"kind":"zero"}}"#);
    assert_eq!(carpenter(&["check", &s]).status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", r#"{"prefix":["9/10","1/10"],"tail":{"kind":"constant","c":"1/3"}}"#);
    let a = carpenter(&["construct", &s, "--vectors", "8"]);
    let b = carpenter(&["construct", &s, "--vectors", "8"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
