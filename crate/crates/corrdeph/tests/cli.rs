//! Black-box tests of the `corrdeph` binary: exit codes, file schemas,
//! determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corrdeph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrdeph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("corrdeph-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn rates_json_report() {
    let out = corrdeph(&[
        "rates",
        "--n",
        "4",
        "--kernel",
        "exp:xi=10",
        "--state",
        "alternating",
        "--d",
        "1",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gamma = report["gamma"].as_f64().unwrap();
    assert!((gamma - 0.182_131_031_366_367).abs() < 1e-12);
    assert_eq!(report["omega_coh"].as_f64().unwrap(), 4.0);
    assert_eq!(report["method"], "PairSum");
}

#[test]
fn rates_csv_file() {
    let path = tmp("rates.csv");
    let out = corrdeph(&[
        "rates",
        "--n",
        "2",
        "--kernel",
        "uncorr",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let content = std::fs::read_to_string(&path).unwrap();
    let mut lines = content.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,d,kernel,state,eps_delta,gamma0,gamma,omega_coh,method"
    );
    assert!(lines.next().unwrap().starts_with("2,1,uncorr,"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn bad_input_exits_2() {
    // odd n for the alternating construction
    let out = corrdeph(&["rates", "--n", "3", "--kernel", "uncorr"]);
    assert_eq!(out.status.code(), Some(2));
    // malformed kernel string (clap usage error also exits 2)
    let out = corrdeph(&["rates", "--n", "2", "--kernel", "exp:xi=-1"]);
    assert_eq!(out.status.code(), Some(2));
    // inadmissible horizon
    let out = corrdeph(&[
        "uncertainty",
        "--n",
        "4",
        "--kernel",
        "exp:xi=10",
        "--T",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_schema_and_engines_agree() {
    let out = corrdeph(&[
        "simulate",
        "--n",
        "2",
        "--kernel",
        "exp:xi=1",
        "--t-max",
        "2",
        "--steps",
        "400",
        "--engine",
        "both",
    ]);
    assert!(out.status.success(), "engines disagree");
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "t,re_coh,im_coh,abs_coh,p1,p2,trace_err"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 401);
    // t=0 row: full coherence, deterministic start
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][3], 0.5);
    assert_eq!(rows[0][4], 1.0);
    // decay by e^{-(1-1/e)} at t=1
    let at_1 = rows.iter().find(|r| (r[0] - 1.0).abs() < 1e-12).unwrap();
    let expected = 0.5 * (-(1.0 - (-1.0_f64).exp())).exp();
    assert!((at_1[3] - expected).abs() < 1e-6);
    for row in &rows {
        assert!(row[6] < 1e-9, "trace drift {}", row[6]);
    }
}

#[test]
fn simulate_rejects_coarse_grid() {
    let out = corrdeph(&[
        "simulate",
        "--n",
        "2",
        "--kernel",
        "exp:xi=1",
        "--t-max",
        "10",
        "--steps",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

#[test]
fn sweep_deterministic_and_schema() {
    let args = [
        "sweep",
        "--mode",
        "fixed-length",
        "--L",
        "1",
        "--xi",
        "1/5",
        "--n",
        "4:24:4",
        "--T",
        "1000",
    ];
    let a = corrdeph(&args);
    let b = corrdeph(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "sweep output must be byte-identical");
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# corrdeph sweep\n"));
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap();
    assert_eq!(header, "n,gamma,gamma_asymptote,delta_omega,delta_omega_pair,r,t_opt");
    let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 6);
}

#[test]
fn sweep_json_output() {
    let path = tmp("sweep.json");
    let out = corrdeph(&[
        "sweep",
        "--mode",
        "fixed-density",
        "--d",
        "1",
        "--xi",
        "10",
        "--n",
        "2:8:2",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let table: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = table["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1]["n"], 4);
    let gamma = rows[1]["gamma"].as_f64().unwrap();
    assert!((gamma - 0.182_131_031_366_367).abs() < 1e-12);
    std::fs::remove_file(&path).ok();
}

#[test]
fn sweep_dark_state_exits_2() {
    let out = corrdeph(&[
        "sweep",
        "--mode",
        "fixed-density",
        "--d",
        "1",
        "--kernel",
        "const",
        "--n",
        "2:8:2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_default_grid_green() {
    let path = tmp("validate.json");
    let out = corrdeph(&["validate", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("pass  alt n=6 kernel=exp:xi=10 simulation fit"));
    assert!(!text.contains("FAIL"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    std::fs::remove_file(&path).ok();
}
