use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mumford::{Mat2, Padic};
use serde_json::{json, Value};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mumford"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> (Value, i32) {
    let out = run(args);
    let code = out.status.code().expect("exit code");
    let text = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text:?}"));
    (v, code)
}

fn digits(v: &Value) -> Padic {
    Padic::parse_digits(v.as_str().expect("digit string"), 3).unwrap()
}

fn agrees(v: &Value, want: &str) {
    let want_p = Padic::parse_digits(want, 3).unwrap();
    assert!(digits(v).agrees_with(&want_p), "got {v}, want {want}");
}

#[test]
fn schottky_test_good_position() {
    let ex1 = fixture("ex1.json");
    let (v, code) = run_json(&["schottky-test", ex1.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "GoodPosition");
    assert_eq!(v["words"], json!([[1], [2]]));
    assert_eq!(v["c"], "2");
    assert_eq!(v["B"][0]["radius_exp"], "2");
}

#[test]
fn schottky_test_product_generators() {
    let f = fixture("ex1_product.json");
    let (v, code) = run_json(&["schottky-test", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "GoodPosition");
    assert_eq!(v["words"].as_array().unwrap().len(), 2);
}

#[test]
fn relation_exits_two() {
    let f = fixture("relation.json");
    let (v, code) = run_json(&["schottky-test", f.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["verdict"], "Relation");
    assert!(!v["word"].as_array().unwrap().is_empty());
}

#[test]
fn non_hyperbolic_exits_three() {
    let f = fixture("with_involution.json");
    let (v, code) = run_json(&["schottky-test", f.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert_eq!(v["verdict"], "NonHyperbolic");
    assert_eq!(v["word"], json!([1]));
    let m = &v["matrix"];
    let mat = Mat2::new(digits(&m[0][0]), digits(&m[0][1]), digits(&m[1][0]), digits(&m[1][1]));
    assert!(!mat.is_hyperbolic().unwrap());
}

#[test]
fn adversarial_input_is_inconclusive() {
    let g1 = Mat2::from_ints([[-5, 32], [-8, 35]], 3, 30);
    let g2 = Mat2::from_ints([[-13, 80], [-8, 43]], 3, 30);
    let h = g1.pow(100).mul(&g2);
    let entry = |x: &Padic| x.to_rational().expect("exact entry").to_string();
    let job = json!({
        "p": 3,
        "generators": [
            [["-5", "32"], ["-8", "35"]],
            [[entry(&h.a), entry(&h.b)], [entry(&h.c), entry(&h.d)]],
        ],
    });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("adversarial.json");
    std::fs::write(&path, job.to_string()).unwrap();
    let (v, code) = run_json(&["schottky-test", "--max-m", "4", path.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert_eq!(v["verdict"], "Inconclusive");
    assert_eq!(v["max_m"], 4);
}

#[test]
fn not_valid_exits_five() {
    let f = fixture("not_valid.json");
    let (v, code) = run_json(&["whittaker", f.to_str().unwrap()]);
    assert_eq!(code, 5);
    assert_eq!(v["verdict"], "NOT VALID");
}

#[test]
fn usage_errors_exit_64() {
    let malformed = fixture("malformed.json");
    let out = run(&["period-matrix", malformed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert!(!out.stderr.is_empty());
    assert_eq!(run(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(run(&["period-matrix", "/nonexistent/job.json"]).status.code(), Some(64));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("composite.json");
    std::fs::write(&path, r#"{"p": 4, "generators": [[["1","2"],["3","4"]]]}"#).unwrap();
    assert_eq!(run(&["schottky-test", path.to_str().unwrap()]).status.code(), Some(64));
    std::fs::write(&path, r#"{"p": 3, "bogus": 1}"#).unwrap();
    assert_eq!(run(&["schottky-test", path.to_str().unwrap()]).status.code(), Some(64));

    let ex1 = fixture("ex1.json");
    let unsafe_without_m = run(&["period-matrix", "--unsafe-no-good-position", ex1.to_str().unwrap()]);
    assert_eq!(unsafe_without_m.status.code(), Some(64));
}

#[test]
fn period_matrix_example_one() {
    let ex1 = fixture("ex1.json");
    let (v, code) = run_json(&["period-matrix", "--precision", "10", ex1.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["certified"], true);
    assert_eq!(v["m"], 5);
    agrees(&v["Q"][0][0], "(...220200000100)_3");
    agrees(&v["Q"][1][1], "(...220200000100)_3");
    agrees(&v["Q"][0][1], "(...0101010101)_3");
    agrees(&v["Q"][1][0], "(...0101010101)_3");
    assert_eq!(v["val"], json!([[2, 0], [0, 2]]));
}

#[test]
fn period_matrix_example_three() {
    let ex3 = fixture("ex3.json");
    let (v, code) = run_json(&["period-matrix", ex3.to_str().unwrap()]);
    assert_eq!(code, 0);
    agrees(&v["Q"][1][2], "(...020201120.1)_3");
    agrees(&v["Q"][0][0], "(...11201000010000)_3");
    assert_eq!(v["val"], json!([[4, 1, 1], [1, 4, -1], [1, -1, 4]]));
}

#[test]
fn period_matrix_valuations_only() {
    let ex3 = fixture("ex3.json");
    let (v, code) = run_json(&["period-matrix", "--m", "0", ex3.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(v.get("Q").is_none());
    assert_eq!(v["val"], json!([[4, 1, 1], [1, 4, -1], [1, -1, 4]]));
}

#[test]
fn unsafe_period_matrix_is_marked_uncertified() {
    let ex1 = fixture("ex1.json");
    let (v, code) = run_json(&["period-matrix", "--unsafe-no-good-position", "--m", "5", ex1.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["certified"], false);
    assert!(v["c"].is_null() && v["log_p_d"].is_null());
    assert_eq!(v["val"], json!([[2, 0], [0, 2]]));
}

#[test]
fn skeleton_outputs() {
    let ex1 = fixture("ex1.json");
    let out = run(&["skeleton", "--format", "dot", ex1.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let dot = String::from_utf8(out.stdout).unwrap();
    assert_eq!(dot.matches(" -- ").count(), 3);
    assert_eq!(dot.matches("label=\"2\"").count(), 3);

    let ex3 = fixture("ex3.json");
    let (v, code) = run_json(&["skeleton", ex3.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["edges"].as_array().unwrap().len(), 6);
    assert_eq!(v["pairing"], json!([["4", "1", "1"], ["1", "4", "-1"], ["1", "-1", "4"]]));
}

#[test]
fn canonical_point() {
    let f = fixture("ex3_z17.json");
    let (v, code) = run_json(&["canonical", "--m", "6", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    let coords = &v["points"][0]["coords"];
    agrees(&coords[0], "(...2100012121)_3");
    agrees(&coords[1], "(...2211022001.1)_3");
    agrees(&coords[2], "(...2221222111.1)_3");
    assert_eq!(v["points"][0]["z"], "17");
}

#[test]
fn whittaker_round_trip() {
    let f = fixture("whittaker.json");
    let (v, code) = run_json(&["whittaker", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    let normal = v["normal_form"].as_array().unwrap();
    let fixed = v["fixed_points"].as_array().unwrap();
    assert_eq!(normal.len(), fixed.len());
    let residue = |x: &Value| digits(x).residue(4).unwrap().format_digits();
    let mut a: Vec<String> = normal.iter().map(residue).collect();
    let mut b: Vec<String> = fixed.iter().map(residue).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn reruns_are_identical() {
    let ex3 = fixture("ex3.json");
    let first = run(&["period-matrix", ex3.to_str().unwrap()]);
    let second = run(&["period-matrix", ex3.to_str().unwrap()]);
    let single = run(&["period-matrix", "--threads", "1", ex3.to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stdout, single.stdout);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    let written = run(&["period-matrix", "-o", path.to_str().unwrap(), ex3.to_str().unwrap()]);
    assert_eq!(written.status.code(), Some(0));
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), first.stdout);
}
