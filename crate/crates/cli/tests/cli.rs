use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdoubling")).args(args).output().expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is JSON"))
        .collect()
}

fn tmp(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("hdoubling-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn field_info_class_numbers() {
    for (d, h) in [("3", 2), ("5", 1), ("10", 2)] {
        let out = run(&["field-info", "--D", d]);
        assert!(out.status.success());
        let v = &json_lines(&out)[0];
        assert_eq!(v["narrow_class_number"], h);
    }
    let out = run(&["field-info", "--D", "3", "--p", "11"]);
    let v = &json_lines(&out)[0];
    assert_eq!(v["character_values"], serde_json::json!([[[1], [1]], [[1], [10]]]));
}

#[test]
fn field_info_rejects_non_squarefree() {
    let out = run(&["field-info", "--D", "4"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("D = 4"));
}

#[test]
fn apply_t_to_eisenstein_is_a_scaled_copy() {
    let out = run(&["apply", "--D", "3", "--p", "7", "--B", "600", "--op", "T q=[13,4,1]"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = &json_lines(&out)[0];
    assert_eq!(v["eigenvalue"], serde_json::json!([2]));
    assert_eq!(v["steps"][0]["precision_out"], 600 / 13);
}

#[test]
fn apply_hasse_shifts_weight_only() {
    let base = run(&["apply", "--D", "3", "--p", "7", "--B", "100", "--op", "diamond q=(1)"]);
    let lifted = run(&["apply", "--D", "3", "--p", "7", "--B", "100", "--op", "hasse"]);
    let (b, l) = (&json_lines(&base)[0]["result"], &json_lines(&lifted)[0]["result"]);
    assert_eq!(l["weight"], 7);
    assert_eq!(b["coeffs"], l["coeffs"]);
    assert_eq!(b["constant"], l["constant"]);
}

#[test]
fn apply_vp_rejects_non_squarefree() {
    let out = run(&["apply", "--D", "3", "--p", "11", "--B", "100", "--op", "VP P=[121,0,1]"]);
    assert!(!out.status.success());
    let out = run(&["apply", "--D", "3", "--p", "11", "--B", "100", "--op", "VP P=[11,6,1]"]);
    assert!(out.status.success());
    let out = run(&[
        "apply", "--D", "3", "--p", "11", "--B", "100", "--form-spec", "random seed=4", "--op", "VP P=(11); T q=[11,5,1] k=11",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn parse_errors_report_positions() {
    let out = run(&["apply", "--D", "3", "--p", "7", "--op", "T q=[13,4 1]"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 10"));
    let out = run(&["apply", "--D", "3", "--p", "7", "--form-spec", "eisenstein phi9=1", "--op", "hasse"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 11"));
}

#[test]
fn apply_reports_precision_exhaustion() {
    let out = run(&["apply", "--D", "3", "--p", "7", "--B", "10", "--op", "T q=[13,4,1]"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn doubling_single_config() {
    let out = run(&["doubling", "--D", "3", "--p", "7", "--B", "2000"]);
    assert!(out.status.success());
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 1);
    let r = &lines[0]["reports"][0];
    assert_eq!(r["s"], 1);
    assert_eq!(r["rank"], 2);
    assert_eq!(r["primes"][0]["semisimple"], false);
}

#[test]
fn doubling_rejects_composite_p() {
    let out = run(&["doubling", "--D", "3", "--p", "9"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn doubling_precision_cap_exit_code() {
    let out = run(&["doubling", "--D", "3", "--p", "7", "--B", "100", "--max-b", "400"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_lines(&out)[0]["status"], "precision_exhausted");
}

#[test]
fn grid_is_order_stable_and_deterministic() {
    let grid = [
        r#"{"D": 3, "p": 7, "B": 2000}"#,
        r#"{"D": 3, "p": 11, "B": 500, "phi2": 1, "roots": "both"}"#,
        r#"{"D": 5, "p": 11, "B": 500}"#,
        r#"{"D": 10, "p": 7, "B": 800, "constant_mode": "v_phi1"}"#,
    ]
    .join("\n");
    let path = tmp("grid.jsonl", &grid);
    let path = path.to_str().unwrap();
    let serial = run(&["doubling", "--config", path, "--jobs", "1"]);
    let parallel = run(&["doubling", "--config", path, "--jobs", "4"]);
    assert!(serial.status.success());
    assert_eq!(serial.stdout, parallel.stdout);
    let lines = json_lines(&serial);
    assert_eq!(lines.len(), 4);
    for (i, l) in lines.iter().enumerate() {
        assert_eq!(l["job"], i);
        assert_eq!(l["status"], "ok");
    }
    assert_eq!(lines[1]["reports"].as_array().unwrap().len(), 4);
}

#[test]
fn grid_reports_failures_inline() {
    let grid = "[{\"D\": 3, \"p\": 9, \"B\": 100}, {\"D\": 3, \"p\": 7, \"B\": 2000}]";
    let path = tmp("grid.json", grid);
    let out = run(&["doubling", "--config", path.to_str().unwrap()]);
    assert!(out.status.success());
    let lines = json_lines(&out);
    assert_eq!(lines[0]["status"], "error");
    assert_eq!(lines[1]["status"], "ok");
}

#[test]
fn bad_config_file_is_a_usage_error() {
    let path = tmp("bad.json", "{\"D\": 3, \"p\": 7, \"B\": 100, \"typo\": 1}");
    let out = run(&["doubling", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("hdoubling-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("info.json");
    let out = run(&["field-info", "--D", "5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["narrow_class_number"], 1);
}
