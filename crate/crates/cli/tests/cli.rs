use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conemetric"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("conemetric-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn angles_reports_troyanov() {
    let out = run(&["angles", "--beta", "0.5,0.5,0.5"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["troyanov"], serde_json::json!(true));
    assert_eq!(v["subcommand"], "angles");
}

#[test]
fn spectrum_has_six_rows_below_two() {
    let out = run(&["spectrum", "--beta", "2.5", "--lambda-max", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 6);
}

#[test]
fn missing_input_file_exits_two() {
    let out = run(&["--config", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["spectrum", "--beta", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_exits_two() {
    let d = scratch("badkey");
    let p = d.join("run.json");
    std::fs::write(&p, r#"{"subcommand": "spectrum", "beta": 1.5, "lambda_max": 2, "mystery": 0}"#).unwrap();
    let out = run(&["--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let a = run(&["split", "--beta0", "2.5", "--targets", "1.7,1.8", "--a", "0.01,-0.02,0.004,0.003"]);
    let b = run(&["split", "--beta0", "2.5", "--targets", "1.7,1.8", "--a", "0.01,-0.02,0.004,0.003"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["result"]["branches"].as_array().unwrap().len(), 2);
}

#[test]
fn solve_then_pair() {
    let d = scratch("pair");
    let out = run(&["solve", "--football", "2.5", "--radial-cells", "100", "--out", d.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = d.join("solve.json");
    let out = run(&["pair", "--diagnostics", report.to_str().unwrap(), "--direction", "1,0,0,0,0,0,0,-1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["classification"]["case"], "partial_rigidity");
    assert_eq!(v["result"]["kernel_dim"], 8);
    let out = run(&["pair", "--diagnostics", report.to_str().unwrap(), "--direction", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_subset_passes_and_threads_are_capped() {
    let out = bin()
        .args(["verify", "--criteria", "2,12", "--format", "csv"])
        .env("CONEMETRIC_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# seed: "));
    assert_eq!(text.lines().filter(|l| l.contains(",true,")).count(), 2);
    let out = bin().args(["verify", "--criteria", "2"]).env("CONEMETRIC_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
