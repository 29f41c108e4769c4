use std::process::{Command, Output};

fn gl2rep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gl2rep"))
        .args(args)
        .env_remove("GL2REP_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn cosets_verification_passes() {
    let o = gl2rep(&["--p", "7", "--n", "1..4", "verify", "cosets"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.ends_with(",cosets,4,44")));
}

#[test]
fn dims_csv_has_fixed_header() {
    let o = gl2rep(&["--p", "5", "--r", "1", "--family", "barR", "--n", "0..2", "dims"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,r,lambda,a,family,n,dim"));
    let dims: Vec<&str> = lines.filter_map(|l| l.rsplit(',').next()).collect();
    assert_eq!(dims, ["2", "10", "50"]);
}

#[test]
fn principal_series_json() {
    let o = gl2rep(&[
        "--p", "5", "--r", "2", "--lambda", "1", "--subgroup", "Kn", "--n", "1", "--format", "json",
        "invariants", "--no-stability",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).expect("json");
    assert_eq!(v["rows"][0]["dim"], 6);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn output_is_independent_of_thread_count() {
    let base = ["--p", "5", "--r", "1", "--subgroup", "T1", "--n", "1..2", "growth"];
    let one = gl2rep(&[&base[..], &["--threads", "1"]].concat());
    let two = gl2rep(&[&base[..], &["--threads", "2"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(gl2rep(&["--p", "11", "dims"]).status.code(), Some(2));
    assert_eq!(gl2rep(&["--p", "5", "--r", "5", "dims"]).status.code(), Some(2));
    assert_eq!(gl2rep(&["--p", "5", "--n", "x..y", "dims"]).status.code(), Some(2));
    assert_eq!(gl2rep(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = std::env::temp_dir().join(format!("gl2rep-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "p=5\nr=1\nlambda=1\nsubgroup=K1\nn=1\n").unwrap();
    let o = gl2rep(&["--config", cfg.to_str().unwrap(), "invariants", "--no-stability"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("5,1,1,0,invariants,1,6"));
    std::fs::write(&cfg, "bogus=1\n").unwrap();
    let o = gl2rep(&["--config", cfg.to_str().unwrap(), "dims"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn hecke_and_zp_checks_pass() {
    assert_eq!(gl2rep(&["--p", "5", "--r", "3", "--m", "2", "hecke-check"]).status.code(), Some(0));
    assert_eq!(gl2rep(&["--p", "7", "zp"]).status.code(), Some(0));
    assert_eq!(gl2rep(&["--p", "5", "--n", "3", "filtration"]).status.code(), Some(0));
}
