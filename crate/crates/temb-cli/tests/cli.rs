use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use temb::limits::psi;
use temb::recurrence::Dir;

fn temb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_temb")).args(args).output().unwrap()
}

fn temb_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_temb")).args(args).env(key, value).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn load(p: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn boundary(doc: &Value) -> Vec<(i64, i64, Value)> {
    doc["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|v| v["kind"] == "boundary")
        .map(|v| (v["j"].as_i64().unwrap(), v["k"].as_i64().unwrap(), v["t"].clone()))
        .collect()
}

#[test]
fn embed_aztec_boundary_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "a4.json");
    let o = temb(&["embed", "--graph", "aztec", "--n", "4", "--pipeline", "recurrence", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = load(&out);
    assert_eq!(doc["graph"], "aztec");
    assert_eq!(doc["mode"], "exact");
    let keys: Vec<&String> = doc.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["graph", "n", "mode", "vertices"]);
    let d = |num: &str| serde_json::json!({"num": num, "log2den": 0});
    let expect = [(4, 0, [d("1"), d("0")]), (0, 4, [d("0"), d("1")]), (-4, 0, [d("-1"), d("0")]), (0, -4, [d("0"), d("-1")])];
    let got = boundary(&doc);
    assert_eq!(got.len(), 4);
    for ((j, k, t), (ej, ek, et)) in got.iter().zip(expect) {
        assert_eq!((*j, *k), (ej, ek));
        assert_eq!(t, &Value::Array(et.to_vec()));
    }
    // 2 n (n - 1) + 1 inner vertices plus the boundary
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 2 * 4 * 3 + 1 + 4);
}

#[test]
fn embed_tower_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "t4.json");
    let o = temb(&["embed", "--graph", "tower", "--n", "4", "--mode", "double", "--out", &out]);
    assert_eq!(code(&o), 0);
    let got: Vec<(i64, i64, Vec<f64>)> = boundary(&load(&out))
        .into_iter()
        .map(|(j, k, t)| (j, k, t.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()))
        .collect();
    assert_eq!(
        got,
        [(8, 0, vec![1.0, 0.0]), (0, 8, vec![0.0, 1.0]), (-4, 0, vec![-1.0, 0.0]), (0, -4, vec![0.0, -1.0])]
    );
}

#[test]
fn embed_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "a20.json");
    let o = temb(&["embed", "--graph", "aztec", "--n", "20", "--cross-check", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["cross_check"]["max_discrepancy"].as_f64().unwrap() < 1e-8);
}

#[test]
fn pipelines_write_the_same_exact_file() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "r.json"), path(dir.path(), "p.json"));
    assert_eq!(code(&temb(&["embed", "--graph", "aztec", "--n", "9", "--out", &a])), 0);
    assert_eq!(code(&temb(&["embed", "--graph", "aztec", "--n", "9", "--pipeline", "probability", "--out", &b])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn embed_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "x.json");
    for args in [
        vec!["embed", "--graph", "aztec", "--n", "4", "--pipeline", "kasteleyn", "--contour-nodes", "100", "--out", &out],
        vec!["embed", "--graph", "aztec", "--n", "4", "--pipeline", "kasteleyn", "--contour-nodes", "32", "--out", &out],
        vec!["embed", "--graph", "aztec", "--n", "4", "--pipeline", "kasteleyn", "--mode", "exact", "--out", &out],
        vec!["embed", "--graph", "tower", "--n", "4", "--pipeline", "probability", "--out", &out],
        vec!["embed", "--graph", "aztec", "--n", "0", "--out", &out],
        vec!["embed", "--graph", "hexagon", "--n", "4", "--out", &out],
        vec!["embed", "--graph", "aztec", "--n", "4", "--out", "/nonexistent/dir/x.json"],
    ] {
        assert_eq!(code(&temb(&args)), 2, "{args:?}");
    }
}

#[test]
fn svg_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut svgs = Vec::new();
    for i in 0..2 {
        let (out, svg) = (path(dir.path(), &format!("a{i}.json")), path(dir.path(), &format!("a{i}.svg")));
        assert_eq!(code(&temb(&["embed", "--graph", "aztec", "--n", "12", "--out", &out, "--svg", &svg])), 0);
        svgs.push(std::fs::read(&svg).unwrap());
    }
    assert_eq!(svgs[0], svgs[1]);
    let text = String::from_utf8(svgs.pop().unwrap()).unwrap();
    assert!(text.contains("viewBox=\"-1.1 -1.1 2.2 2.2\"") && text.contains("stroke=\"blue\""));
}

#[test]
fn verify_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "a.json");
    assert_eq!(code(&temb(&["embed", "--graph", "aztec", "--n", "30", "--mode", "double", "--out", &out])), 0);
    let common = ["--seed", "11", "--pairs", "100000", "--delta-prime", "8"];
    let from_file = temb(&[&["verify", out.as_str()][..], &common].concat());
    let inline = temb(&[&["verify", "--graph", "aztec", "--n", "30", "--mode", "double"][..], &common].concat());
    assert_eq!(code(&from_file), 0, "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(code(&inline), 0);
    assert_eq!(from_file.stdout, inline.stdout);
    let report: Value = serde_json::from_slice(&inline.stdout).unwrap();
    assert_eq!(report["pass"], true);
    let names: Vec<&str> = report["runs"][0]["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for name in ["angle_condition", "properness", "perfectness", "rigidity", "lip", "exp_fat"] {
        assert!(names.contains(&name), "{name}");
    }
}

#[test]
fn verify_perturbed_file_names_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "a.json");
    assert_eq!(code(&temb(&["embed", "--graph", "aztec", "--n", "10", "--mode", "double", "--out", &out])), 0);
    let mut doc = load(&out);
    let v = doc["vertices"].as_array_mut().unwrap().iter_mut().find(|v| v["j"] == 1 && v["k"] == 2).unwrap();
    let re = v["t"][0].as_f64().unwrap();
    v["t"][0] = serde_json::json!(re + 0.01);
    std::fs::write(&out, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = temb(&["verify", &out, "--seed", "1", "--pairs", "10000", "--delta-prime", "8"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("angle_condition"), "{err}");
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn verify_errors_are_structured() {
    let o = temb(&["verify", "--graph", "aztec", "--n", "10", "--seed", "1", "--delta", "5"]);
    assert_eq!(code(&o), 2);
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "no_admissible_pairs");

    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, r#"{"graph": "aztec", "n": 2, "mode": "double", "vertices": []}"#).unwrap();
    let o = temb(&["verify", &bad, "--seed", "1"]);
    assert_eq!(code(&o), 2);
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "malformed_input");

    assert_eq!(code(&temb(&["verify", "--graph", "aztec", "--n", "10"])), 2);
    assert_eq!(code(&temb(&["verify", &path(dir.path(), "missing.json"), "--seed", "1"])), 2);
}

#[test]
fn verify_sequence_reports_frozen_collapse() {
    let o = temb(&["verify", "--graph", "aztec", "--n", "16,32", "--mode", "double", "--seed", "2", "--pairs", "20000", "--delta-prime", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 2);
    assert_eq!(report["sequence"].as_array().unwrap().len(), 4);
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn limits_csv() {
    let o = temb(&["limits", "--grid", "11"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().next().unwrap(), "x,y,Re z,Im z,ϑ,region,Re ξ,Im ξ");
    let rows = csv_rows(&text);
    let f = |s: &str| s.parse::<f64>().unwrap();
    let centre = rows.iter().find(|r| f(&r[0]) == 0.0 && f(&r[1]) == 0.0).unwrap();
    assert_eq!(centre[5], "Liquid");
    for i in [2, 3, 4, 6] {
        assert!(f(&centre[i]).abs() < 1e-15);
    }
    assert!((f(&centre[7]) - 1.0).abs() < 1e-15);
    let east = rows.iter().find(|r| (f(&r[0]) - 0.8).abs() < 1e-12 && f(&r[1]) == 0.0).unwrap();
    assert_eq!((f(&east[2]), f(&east[3])), (1.0, 0.0));
    assert!((f(&east[4]) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert_eq!(east[5], "EastFrozen");
    assert!(east[6].is_empty() && east[7].is_empty());
    // every number carries 17 significant digits
    assert!(centre[0].starts_with("0.0000000000000000e"));

    let residuals: Vec<f64> = rows
        .iter()
        .filter(|r| !r[2].is_empty())
        .map(|r| {
            let (x, y) = (f(&r[0]), f(&r[1]));
            (Dir::ALL.iter().map(|&d| psi(d, x, y).unwrap()).sum::<f64>() - 1.0).abs()
        })
        .collect();
    assert!(residuals.iter().sum::<f64>() / (residuals.len() as f64) < 1e-10);
}

#[test]
fn limits_to_file_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "g.csv");
    assert_eq!(code(&temb(&["limits", "--grid", "2", "--out", &out])), 0);
    // the four corners of [-1,1]^2 lie on the domain boundary
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1 + 0);
    assert_eq!(code(&temb(&["limits", "--grid", "1"])), 2);
}

#[test]
fn thread_cap() {
    assert_eq!(code(&temb_env(&["limits", "--grid", "3"], "TEMB_THREADS", "1")), 0);
    assert_eq!(code(&temb_env(&["limits", "--grid", "3"], "TEMB_THREADS", "zero")), 2);
    assert_eq!(code(&temb_env(&["limits", "--grid", "3"], "TEMB_THREADS", "0")), 2);
}
