use std::path::PathBuf;
use std::process::Command;

use cubiclab::cli::{run, EXIT_BUDGET, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_OK};
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn call(args: &[&str]) -> (i32, Value) {
    let mut out = Vec::new();
    let mut full = vec!["cubiclab"];
    full.extend_from_slice(args);
    let code = run(full, &mut out);
    let v = serde_json::from_slice(&out).unwrap_or(Value::Null);
    (code, v)
}

#[test]
fn count_taxicab() {
    let f = data("taxicab.json");
    let (code, v) = call(&["count", "--form", &f, "--P", "12", "--strategy", "mim"]);
    assert_eq!(code, EXIT_OK);
    let (_, d) = call(&["count", "--form", &f, "--P", "12", "--strategy", "direct"]);
    assert_eq!(v["value"], d["value"]);
    assert!(v["wall_ms"].is_number());
}

#[test]
fn count_dumps_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.csv");
    let (code, v) = call(&[
        "count",
        "--form",
        &data("taxicab.json"),
        "--P",
        "3",
        "--dump-solutions",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count() as u64, v["value"].as_u64().unwrap());
}

#[test]
fn expsum_complete_and_crt_agree() {
    let f = data("three_cubes.json");
    let (c1, a) = call(&["expsum", "complete", "--form", &f, "--q", "36", "--a", "5", "--avec", "1,2,0"]);
    let (c2, b) = call(&["expsum", "complete", "--form", &f, "--q", "36", "--a", "5", "--avec", "1,2,0", "--crt"]);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    let d = (a["re"].as_f64().unwrap() - b["re"].as_f64().unwrap()).abs()
        + (a["im"].as_f64().unwrap() - b["im"].as_f64().unwrap()).abs();
    assert!(d < 1e-9);
}

#[test]
fn expsum_over_budget_exits_3() {
    let (code, _) = call(&["expsum", "complete", "--form", &data("taxicab.json"), "--q", "1000", "--a", "1", "--avec", "0,0,0,0"]);
    assert_eq!(code, EXIT_BUDGET);
}

#[test]
fn construct_transcript() {
    let (code, v) = call(&[
        "construct",
        "--form",
        &data("taxicab.json"),
        "--decomp",
        &data("taxicab_decomp.json"),
        "--linsys",
        &data("golden.json"),
        "--tau",
        "0.3",
        "--eta",
        "0.05",
        "--Y",
        "500",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["found"], true);
    assert_eq!(v["verification"]["cubic_value"], "0");
    assert_eq!(v["verification"]["constraints_hold"], true);
}

#[test]
fn sintegral_divergent_case_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    let l = dir.path().join("l.json");
    std::fs::write(&f, r#"{"n": 2, "monomials": [{"i": 1, "j": 1, "k": 1, "c": 1}]}"#).unwrap();
    std::fs::write(&l, r#"{"n": 2, "r": 1, "rows": [[0.0, 1.4142135623730951]]}"#).unwrap();
    let (code, v) = call(&[
        "sintegral",
        "--form",
        f.to_str().unwrap(),
        "--linsys",
        l.to_str().unwrap(),
        "--schedule",
        "4,8,16,32",
        "--samples",
        "20000",
    ]);
    assert_eq!(code, EXIT_CONVERGENCE);
    assert_eq!(v["table"].as_array().unwrap().len(), 4);
}

#[test]
fn validate_reports_problems() {
    let (code, v) = call(&["validate", &data("taxicab_experiment.json")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["clean"], true);

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("f.json"),
        r#"{"n": 2, "monomials": [{"i": 2, "j": 1, "k": 2, "c": 1}]}"#,
    )
    .unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"form": "f.json", "eta": 0, "P": 5}"#).unwrap();
    let (code, v) = call(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    let msgs: Vec<&str> = v["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["message"].as_str().unwrap())
        .collect();
    assert!(msgs.contains(&"eta must be positive"));
    assert!(msgs.iter().any(|m| m.contains("index order")));
}

#[test]
fn asymptotic_report_is_reproducible() {
    let cfg = data("taxicab_experiment.json");
    let (c1, a) = call(&["asymptotic", "--config", &cfg]);
    let (c2, b) = call(&["asymptotic", "--config", &cfg, "--workers", "2"]);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    assert_eq!(strip(a.clone()), strip(b));
    assert_eq!(a["hypotheses"]["asymptotic_formula"], "fails");
    assert_eq!(a["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn hbounds_subcommand() {
    let (code, v) = call(&["hbounds", "--form", &data("taxicab.json"), "--decomp", &data("taxicab_decomp.json")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!((v["lower"].as_u64(), v["upper"].as_u64()), (Some(2), Some(2)));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cubiclab");
    let ok = Command::new(bin)
        .args(["kernel", "check", "--eta", "0.5", "--rho", "0.2", "--grid", "10", "--tol", "1e-3"])
        .env("CUBICLAB_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    let bad = Command::new(bin).args(["count", "--form", "/nonexistent.json", "--P", "3"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
