use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tightspan")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str, body: &str) -> String {
    let dir = std::env::temp_dir().join(format!("tightspan-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn paper_table_passes() {
    let o = run(&["paper"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("d_GH(A,B) | 1 | 1 | pass"));
    assert!(s.contains("d_GH(V_X,V_Y) | 2 | 2 | pass"));
    assert!(s.contains("min line distortion Z_1 | 8/3 | 2.666666667 | pass"));
    assert!(!s.contains("FAIL"));
}

#[test]
fn gh_json_on_fixtures() {
    let o = run(&["gh", "fixture:INTRO_A", "fixture:INTRO_B", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dis"], 2.0);
    assert_eq!(v["gh"], 1.0);
    assert_eq!(v["optimal"], true);
}

#[test]
fn certify_reports_theorem_tag() {
    let o = run(&["certify", "fixture:EX33_A:8", "fixture:EX33_B:8", "--mesh", "0.5", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["theorem"], "3.1");
    assert_eq!(v["dis0"], 2.0);
    assert!(v["dis_final"].as_f64().unwrap() <= 5.0 + 1e-9);
    let o = run(&["certify", "fixture:INTRO_A", "fixture:INTRO_B", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["theorem"], "3.2");
    assert_eq!(v["dis_final"], 2.0);
}

#[test]
fn validation_failures_exit_one() {
    let bad = tmp("bad.phy", "2\np 0 3\nq 5 0\n");
    let o = run(&["validate", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("asym"));
    assert_eq!(run(&["validate", "fixture:NOPE"]).status.code(), Some(1));
    assert_eq!(run(&["gh", "fixture:SEG2"]).status.code(), Some(1));
    assert_eq!(run(&["experiment", "--mesh", "0"]).status.code(), Some(1));
    let loop_ = tmp("tri.csv", "p,q,r\np,0,1,5\nq,1,0,1\nr,5,1,0\n");
    assert_eq!(run(&["validate", &loop_]).status.code(), Some(1));
}

#[test]
fn parse_errors_exit_three() {
    let bad = tmp("broken.json", "{\"labels\": [\"p\"],");
    assert_eq!(run(&["validate", &bad]).status.code(), Some(3));
    let nwk = tmp("broken.nwk", "((a:1,b:1);");
    assert_eq!(run(&["tree", &nwk]).status.code(), Some(3));
    assert_eq!(run(&["validate", "/nonexistent/file.csv"]).status.code(), Some(3));
}

#[test]
fn valid_matrix_reports_four_point() {
    let good = tmp("intro.csv", "a1,a2,a3,a4\na1,0,4,6,6\na2,4,0,6,6\na3,6,6,0,4\na4,6,6,4,0\n");
    let o = run(&["validate", &good, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["four_point"], true);
    assert_eq!(v["diameter"], 6.0);
}

#[test]
fn tree_round_trip_through_files() {
    let o = run(&["tree", "fixture:INTRO_B"]);
    assert_eq!(o.status.code(), Some(0));
    let nwk = tmp("b.nwk", &stdout(&o));
    let o = run(&["tree", &nwk, "--emit", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = tmp("b.csv", &stdout(&o));
    let o = run(&["gh", &csv, "fixture:INTRO_B", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dis"], 0.0);
    // Non-tree metrics are rejected as input errors.
    assert_eq!(run(&["tree", "fixture:EX33_A:8"]).status.code(), Some(1));
}

#[test]
fn span_exports() {
    let o = run(&["span", "fixture:EX33_A:40", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(v["edges"].as_array().unwrap().len(), 4);
    assert_eq!(v["cells"].as_array().unwrap().len(), 1);
    let dot = stdout(&run(&["span", "fixture:INTRO_B", "--emit", "dot"]));
    assert!(dot.contains("--"));
    let cj = stdout(&run(&["span", "fixture:SEG2", "--emit", "complex-json"]));
    assert!(cj.contains("\"vertices\""));
}

#[test]
fn extend_preserves_distortion() {
    for (a, b) in [("fixture:INTRO_A", "fixture:INTRO_B"), ("fixture:EX33_A:8", "fixture:EX33_B:8")] {
        let o = run(&["extend", a, b, "--mesh", "1", "--json"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["preserved"], true);
    }
}

#[test]
fn experiment_is_deterministic_and_writes_out() {
    let args = ["experiment", "--instances", "4", "--seed", "9"];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    assert!(a.lines().last().unwrap().starts_with("# instances=4 violations=0"));
    let out = std::env::temp_dir().join(format!("tightspan-exp-{}.json", std::process::id()));
    let o = run(&["experiment", "--instances", "2", "--kind", "general", "--mesh", "0.5", "--json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["summary"]["instances"], 2);
}
