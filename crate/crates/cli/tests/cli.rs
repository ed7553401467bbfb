use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tlfacp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = run(&all);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (v, o.status.code().unwrap())
}

fn scratch(name: &str, body: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn solves_the_two_column_example() {
    let i4 = fixture("i4.json");
    let (v, code) = json(&["solve", &i4]);
    assert_eq!(code, 0);
    assert_eq!(v["status"]["kind"], "LocalOptimum");
    assert_eq!(v["value"], 1);
    assert_eq!(v["x"], serde_json::json!([0, -1]));
    let text = stdout(&run(&["solve", &i4]));
    assert!(text.contains("value: 1"), "{text}");
}

#[test]
fn every_method_agrees_on_i4() {
    let i4 = fixture("i4.json");
    for m in ["auto", "tree", "mincut"] {
        let (v, code) = json(&["solve", &i4, "--method", m]);
        assert_eq!(code, 0, "{m}");
        assert_eq!(v["value"], 1, "{m}");
        assert_eq!(v["components"][0]["trace"][0]["J"], serde_json::json!([0]), "{m}");
    }
}

#[test]
fn unbounded_exits_three_with_witness() {
    let o = run(&["solve", &fixture("i2.json")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("unbounded along: {2}"));
    let (v, _) = json(&["solve", &fixture("i2.json")]);
    assert_eq!(v["status"]["direction"], serde_json::json!([1]));
}

#[test]
fn degenerate_tree_run_exits_four() {
    let o = run(&["solve", &fixture("i1.json"), "--method", "tree"]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["solve", &fixture("i1.json")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_input_exits_one() {
    let bad = scratch("bad.json", "{\"Aplus\": [[0, ");
    let o = run(&["solve", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = run(&["solve", "/nonexistent/instance.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn undefined_objective_exits_one() {
    let o = run(&["eval", &fixture("i4.json"), "--point", "0,-inf"]);
    assert_eq!(o.status.code(), Some(1));
    let (v, code) = json(&["eval", &fixture("i4.json"), "--point", "0,-1"]);
    assert_eq!(code, 0);
    assert_eq!(v["value"], 1);
    assert_eq!(v["feasible"], true);
}

#[test]
fn dot_export_of_i4() {
    let o = run(&["export-dot", &fixture("i4.json"), "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    for edge in ["u1 -> v2", "w1 -> v2", "v1 -> w1"] {
        assert!(dot.contains(edge), "missing {edge} in\n{dot}");
    }
    assert!(!dot.contains("u1 -> v1"));
}

#[test]
fn setcover_generation_round_trips() {
    let out = run(&["generate", "setcover", "--ground", "3", "--subsets", "1,2;2,3;1;3"]);
    assert_eq!(out.status.code(), Some(0));
    let path = scratch("cover.json", &stdout(&out));
    let (v, code) = json(&["solve", &path]);
    assert_eq!(code, 0);
    assert_eq!(v["value"], 2);
    let (g, _) = json(&["oracle", "global", &path]);
    assert_eq!(g["value"], 2);
}

#[test]
fn uncoverable_family_is_infeasible() {
    let out = run(&["generate", "setcover", "--ground", "3", "--subsets", "1,2"]);
    let path = scratch("uncoverable.json", &stdout(&out));
    assert_eq!(run(&["solve", &path]).status.code(), Some(2));
}

#[test]
fn nondegenerate_setcover_agrees_across_methods() {
    let out = run(&["generate", "setcover-nd", "--ground", "2", "--subsets", "1;2;1,2"]);
    assert_eq!(out.status.code(), Some(0));
    let path = scratch("cover_nd.json", &stdout(&out));
    for (first, second) in [("tree", "mincut"), ("mincut", "tree")] {
        let (v, code) = json(&["solve", &path, "--method", first]);
        assert_eq!(code, 0, "{first}");
        let x: Vec<String> = v["original"]["x"].as_array().unwrap().iter().map(|e| e.to_string()).collect();
        let point = x.join(",");
        let (check, _) = json(&["check-local", &path, "--point", &point]);
        assert_eq!(check["verdict"], "LocallyOptimal", "{first} stopped at {point}");
        let (again, code) = json(&["solve", &path, "--method", second, "--point", &point]);
        assert_eq!(code, 0);
        assert_eq!(again["iterations"], 0, "{second} moved from the {first} optimum");
        assert_eq!(again["value"], v["value"]);
    }
}

#[test]
fn tree_and_mincut_agree_on_local_trap() {
    let trap = fixture("local_trap.json");
    let (tree, _) = json(&["solve", &trap, "--method", "tree"]);
    let (cut, _) = json(&["solve", &trap, "--method", "mincut"]);
    assert_eq!(tree["value"], cut["value"]);
    let (g, code) = json(&["oracle", "global", &trap]);
    assert_eq!(code, 0);
    assert_eq!(g["value"], 3);
}

#[test]
fn json_output_is_deterministic() {
    let trap = fixture("local_trap.json");
    let a = stdout(&run(&["solve", &trap, "--format", "json"]));
    let b = stdout(&run(&["solve", &trap, "--format", "json"]));
    assert_eq!(a, b);
}

#[test]
fn random_generation_is_seeded() {
    let a = stdout(&run(&["generate", "random", "--seed", "7", "--n", "4"]));
    let b = stdout(&run(&["generate", "random", "--seed", "7", "--n", "4"]));
    let c = stdout(&run(&["generate", "random", "--seed", "8", "--n", "4"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn local_check_and_directions_at_start() {
    let i4 = fixture("i4.json");
    let (v, _) = json(&["check-local", &i4, "--point", "0,0"]);
    assert_eq!(v["verdict"], "NotLocal");
    assert_eq!(v["J"], serde_json::json!([0]));
    let (v, _) = json(&["check-local", &i4, "--point", "0,-1"]);
    assert_eq!(v["verdict"], "LocallyOptimal");
    assert_eq!(v["mincut"]["status"], "LocallyOptimal");
    let (d, _) = json(&["oracle", "directions", &i4, "--point", "0,0"]);
    assert_eq!(d["directions"][0]["mu"], -1);
}

#[test]
fn transport_matches_solve_without_constraints() {
    let body = r#"{"Aplus": [], "Aminus": [], "C": [[0, 1], [2, 0]], "muPlus": [1, 1], "muMinus": [1, 1]}"#;
    let path = scratch("transport.json", body);
    let (t, code) = json(&["oracle", "transport", &path]);
    assert_eq!(code, 0);
    let (s, _) = json(&["solve", &path]);
    assert_eq!(t["value"], s["value"]);
}

#[test]
fn dot_format_rejected_elsewhere() {
    let o = run(&["solve", &fixture("i4.json"), "--format", "dot"]);
    assert_eq!(o.status.code(), Some(1));
}
