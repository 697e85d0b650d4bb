use std::path::PathBuf;
use std::process::{Command, Output};

fn pam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pam"))
        .args(args)
        .env_remove(pam_cli::OUTPUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("pam-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn paths_n4_lists_the_eight_vectors() {
    let o = pam(&["paths", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[0], serde_json::json!({"n": 4, "a": [2, 1, 1, 0], "path_heights": [1, 1, 2, 3]}));
    assert_eq!(lines[7]["a"], serde_json::json!([1, 1, 1, 1]));
}

#[test]
fn resolved_config_is_logged() {
    let o = pam(&["paths", "--n", "2"]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(r#""n":2"#) && err.contains(r#""format":"json""#), "{err}");
}

#[test]
fn bound_table_is_monotone_in_t() {
    let o = pam(&["bound-table", "--H0", "0.75", "--H", "0.3", "--p", "2", "--t", "1,2,4,8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..6], ["t", "p", "series_value", "envelope_value", "C1", "C2"]);
    let series: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(series.len(), 4);
    assert!(series.windows(2).all(|w| w[0] < w[1]), "{series:?}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(pam(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pam(&["paths", "--n", "0"]).status.code(), Some(2));
    assert_eq!(pam(&["j0", "--measure", "cauchy:1"]).status.code(), Some(2));
    assert_eq!(pam(&["bound-table", "--H0", "0.6", "--H", "0.1"]).status.code(), Some(2));
    // violated integrability condition of the simplex integral
    assert_eq!(pam(&["dirichlet", "--alphas", "-1.5", "--betas", "0"]).status.code(), Some(2));
    assert_eq!(pam(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_config_key_is_named() {
    let dir = temp_dir("cfg");
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"H0": 0.7, "sample": 10}"#).unwrap();
    let o = pam(&["mc-verify", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("sample"));
}

#[test]
fn flags_override_config_file() {
    let dir = temp_dir("overlay");
    let path = dir.join("run.json");
    std::fs::write(&path, r#"{"t": [1, 2], "measure": {"type": "lebesgue", "c": 2}}"#).unwrap();
    let o = pam(&["j0", "--config", path.to_str().unwrap(), "--t", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("3.0000000000000000e0,0.0000000000000000e0,2.0000000000000000e0"), "{text}");
}

#[test]
fn dirichlet_with_oracle_agrees() {
    let o = pam(&["dirichlet", "--t", "2", "--alphas", "0.5,-0.3", "--betas", "-0.5,0.2", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["oracle"]["agree"], true);
}

#[test]
fn identity_and_gamma_scan_run() {
    let o = pam(&["identity", "--n", "6", "--count", "20", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("6,20,0,32,true"));
    let o = pam(&["gamma-scan", "--n-max", "3", "--H0", "0.75", "--H", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "n,H0,H,a,gamma_n,log_gamma_n");
    assert_eq!(text.lines().count(), 1 + 1 + 2 + 4);
}

#[test]
fn output_directory_and_byte_stability() {
    let dir = temp_dir("out");
    let run = |name: &str| {
        Command::new(env!("CARGO_BIN_EXE_pam"))
            .args(["mc-verify", "--samples", "5000", "--seed", "4", "--output", name])
            .env(pam_cli::OUTPUT_DIR_ENV, &dir)
            .status()
            .unwrap()
    };
    assert!(run("a.jsonl").success());
    assert!(run("b.jsonl").success());
    let a = std::fs::read(dir.join("a.jsonl")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(dir.join("b.jsonl")).unwrap());
    let status = Command::new(env!("CARGO_BIN_EXE_pam"))
        .args(["paths", "--n", "3"])
        .env(pam_cli::OUTPUT_DIR_ENV, &dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(dir.join("paths.jsonl")).unwrap().lines().count(), 4);
}

#[test]
fn mc_verify_report_shape() {
    let o = pam(&["mc-verify", "--n", "2", "--t", "0.5,1", "--samples", "20000", "--measure", "lebesgue:1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["pass"], true);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[0]["psi_checks"].as_array().unwrap().len(), 10);
    assert!(points[1]["term_bound"]["estimate"]["stderr"].as_f64().unwrap() > 0.0);
}
