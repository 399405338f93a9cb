use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn satmech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satmech")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &TempDir, name: &str, body: &Value) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body.to_string()).unwrap();
    path_str(&path)
}

fn path_str(path: &Path) -> String {
    path.to_str().unwrap().to_string()
}

#[test]
fn optimal_nine() {
    let out = satmech(&["optimal", "--n", "9", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["pi1_star"], "12/13");
    assert_eq!(report["ell"], 4);
    assert_eq!(report["pi_star"]["pi"][1], "1/39");
}

#[test]
fn optimal_three_is_gl() {
    let report = json_of(&satmech(&["optimal", "--n", "3", "--format", "json"]));
    assert_eq!(report["pi_star"]["pi"], json!(["2/3", "1/3", "0"]));
}

#[test]
fn optimal_tie_preference_at_eight() {
    let default = json_of(&satmech(&["optimal", "--n", "8", "--format", "json"]));
    assert_eq!(default["ell"], 2);
    assert_eq!(default["pi1_star"], "7/8");
    assert_eq!(default["unique"], false);

    let four = json_of(&satmech(&["optimal", "--n", "8", "--ell-tie", "4", "--format", "json"]));
    assert_eq!(four["ell"], 4);
    assert_eq!(four["pi1_star"], "7/8");
    assert_eq!(four["pi_star"]["pi"][1], "1/24");
}

#[test]
fn ignored_tie_preference_warns() {
    let out = satmech(&["optimal", "--n", "9", "--ell-tie", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["ell"], 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ignored"));
}

#[test]
fn optimal_rejects_tiny_n() {
    let out = satmech(&["optimal", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn price_gl4_all_methods_agree() {
    let dir = TempDir::new().unwrap();
    let rule = write(&dir, "rule.json", &json!({"n": 4, "pi": ["3/4", "1/4", "0", "0"]}));
    let profile = write(&dir, "profile.json", &json!({"values": [8, 4, 2, 1]}));

    let single = satmech(&["price", "--rule", &rule, "--profile", &profile, "--format", "json"]);
    assert_eq!(single.status.code(), Some(0));
    let outcome = json_of(&single);
    assert_eq!(outcome["payments"], json!(["2", "0", "-1", "-1"]));
    assert_eq!(outcome["utilities"], json!(["4", "1", "1", "1"]));

    let all = satmech(&["price", "--rule", &rule, "--profile", &profile, "--method", "all", "--format", "json"]);
    assert_eq!(all.status.code(), Some(0));
    let report = json_of(&all);
    assert_eq!(report["agree"], true);
    let methods: Vec<&str> = report["outcomes"].as_array().unwrap().iter().map(|o| o["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["subset", "two-step", "recursive"]);
    for o in report["outcomes"].as_array().unwrap() {
        assert_eq!(o["payments"], json!(["2", "0", "-1", "-1"]));
    }
}

#[test]
fn price_optimal_nine_all_methods() {
    let dir = TempDir::new().unwrap();
    let optimal = json_of(&satmech(&["optimal", "--n", "9", "--format", "json"]));
    let rule = write(&dir, "rule.json", &optimal["pi_star"]);
    let profile = write(&dir, "profile.json", &json!({"values": ["9", "1/2", "7", "3/4", "5", "2", "8", "1/3", "6"]}));
    let out = satmech(&["price", "--rule", &rule, "--profile", &profile, "--method", "all", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["agree"], true);
    assert_eq!(report["outcomes"].as_array().unwrap().len(), 3);
}

#[test]
fn price_zero_profile_pays_nothing() {
    let dir = TempDir::new().unwrap();
    let rule = write(&dir, "rule.json", &json!({"n": 5, "pi": ["4/5", "1/5", "0", "0", "0"]}));
    let profile = write(&dir, "profile.json", &json!({"values": [0, 0, 0, 0, 0]}));
    let out = json_of(&satmech(&["price", "--rule", &rule, "--profile", &profile, "--format", "json"]));
    assert_eq!(out["payments"], json!(["0", "0", "0", "0", "0"]));
}

#[test]
fn price_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let efficient = write(&dir, "eff.json", &json!({"n": 3, "pi": ["1", "0", "0"]}));
    let profile = write(&dir, "profile.json", &json!({"values": [3, 2, 1]}));
    let out = satmech(&["price", "--rule", &efficient, "--profile", &profile]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not implementable"));

    let malformed = dir.path().join("bad.json");
    std::fs::write(&malformed, "{\"values\": [\"1/0\"]}").unwrap();
    let gl3 = write(&dir, "gl3.json", &json!({"n": 3, "pi": ["2/3", "1/3", "0"]}));
    assert_eq!(satmech(&["price", "--rule", &gl3, "--profile", &path_str(&malformed)]).status.code(), Some(2));
    assert_eq!(satmech(&["price", "--rule", &gl3, "--profile", "/nonexistent.json"]).status.code(), Some(2));

    let wrong_size = write(&dir, "four.json", &json!({"values": [4, 3, 2, 1]}));
    assert_eq!(satmech(&["price", "--rule", &gl3, "--profile", &wrong_size]).status.code(), Some(2));
}

#[test]
fn check_implementability() {
    let gl = satmech(&["check", "--pi", "3/4,1/4,0,0", "--format", "json"]);
    assert_eq!(gl.status.code(), Some(0));
    assert_eq!(json_of(&gl)["implementable"], true);

    let bad = satmech(&["check", "--pi", "1/2,1/2,0,0", "--format", "json"]);
    assert_eq!(bad.status.code(), Some(1));
    let report = json_of(&bad);
    assert_eq!(report["implementable"], false);
    assert_eq!(report["residual"], "1");

    assert_eq!(satmech(&["check", "--pi", "3/4,x"]).status.code(), Some(2));
    assert_eq!(satmech(&["check", "--pi", "1/4,3/4"]).status.code(), Some(2));
}

#[test]
fn table_csv() {
    let out = satmech(&["table", "--from", "9", "--to", "17", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,ell,binomial,pi1_exact,pi1_percent");
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[1], "9,4,35,12/13,92.3");
    assert_eq!(lines[5], "13,6,462,463/468,98.9");
    assert_eq!(lines[8], "16,8,3432,3433/3440,99.8");
    assert_eq!(satmech(&["table", "--from", "2", "--to", "5"]).status.code(), Some(2));
}

#[test]
fn certify_twelve() {
    let out = satmech(&["certify", "--n", "12", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_of(&out);
    assert_eq!(report["certificate"]["z"], "253/258");
    assert_eq!(report["check"]["feasible"], true);
    assert_eq!(report["primal_value"], "253/258");
    assert_eq!(report["closed"], true);

    let human = satmech(&["certify", "--n", "12", "--format", "human"]);
    assert!(String::from_utf8_lossy(&human.stdout).contains("strong duality theorem"));
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let gl3 = write(&dir, "gl3.json", &json!({"n": 3, "pi": ["2/3", "1/3", "0"]}));
    let pass = satmech(&["verify", "--rule", &gl3, "--format", "json"]);
    assert_eq!(pass.status.code(), Some(0));
    let report = json_of(&pass);
    assert_eq!(report["grid_spec"], "values=0,1/3,2/3,1;exhaustive");
    assert!(report["checks"].as_array().unwrap().iter().any(|c| c["name"] == "dsic"));

    let random = satmech(&["verify", "--rule", &gl3, "--random", "40", "--seed", "3", "--format", "json"]);
    assert_eq!(random.status.code(), Some(0));
    assert_eq!(json_of(&random)["grid_spec"], "random=40;denom=64;seed=3");

    let efficient = write(&dir, "eff.json", &json!({"n": 3, "pi": ["1", "0", "0"]}));
    let fail = satmech(&["verify", "--rule", &efficient, "--grid", "values=0,1,2;exhaustive", "--format", "json"]);
    assert_eq!(fail.status.code(), Some(1));
    let failed: Vec<Value> = json_of(&fail)["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .cloned()
        .collect();
    assert!(failed.iter().any(|c| c["name"] == "budget_balance"));

    assert_eq!(satmech(&["verify", "--rule", &gl3, "--grid", "values=1;sometimes"]).status.code(), Some(2));
    assert_eq!(satmech(&["verify", "--rule", &gl3, "--random", "5"]).status.code(), Some(2));
}

#[test]
fn pareto_report() {
    let dir = TempDir::new().unwrap();
    let equal = write(&dir, "eq.json", &json!({"n": 4, "pi": ["1/4", "1/4", "1/4", "1/4"]}));
    let out = satmech(&["pareto", "--rule", &equal, "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json_of(&out);
    assert_eq!(report["dominated"], true);
    assert_eq!(report["within_bounds"], false);

    let gl = write(&dir, "gl.json", &json!({"n": 4, "pi": ["3/4", "1/4", "0", "0"]}));
    let out = satmech(&["pareto", "--rule", &gl, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["dominated"], false);
}

#[test]
fn machine_output_is_byte_identical() {
    for args in [
        &["table", "--from", "3", "--to", "20", "--format", "json"][..],
        &["certify", "--n", "10", "--format", "csv"],
        &["optimal", "--n", "15", "--format", "json"],
    ] {
        assert_eq!(satmech(args).stdout, satmech(args).stdout);
    }
}

#[test]
fn piped_output_defaults_to_json() {
    let out = satmech(&["optimal", "--n", "5"]);
    assert_eq!(json_of(&out)["pi1_star"], "4/5");
}
