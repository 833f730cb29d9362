use cohest::cli::{run, VERSION};
use cohest::costs::{figure_points, Figure, CSV_HEADER};
use serde_json::Value;
use std::process::Command;

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cohest"))
}

fn run_str(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["cohest"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn data_lines(s: &str) -> Vec<&str> {
    s.lines().filter(|l| !l.starts_with('#')).collect()
}

fn json_body(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn costs_headline_defaults() {
    let (code, out, _) = run_str(&["costs"]);
    assert_eq!(code, 0);
    assert!(out.starts_with(&format!("# cohest {VERSION}\n")));
    assert!(out.contains("# seed = 0"));
    let rows = data_lines(&out);
    assert_eq!(rows[0], CSV_HEADER);
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("textbook_pe,10,"));
    assert!(rows[2].starts_with("improved_pe,10,"));
}

#[test]
fn costs_empty_grid_is_header_only() {
    for flag in ["--n", "--alpha", "--delta", "--alg"] {
        let (code, out, _) = run_str(&["costs", flag, ""]);
        assert_eq!(code, 0);
        assert_eq!(data_lines(&out), vec![CSV_HEADER]);
    }
}

#[test]
fn costs_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &std::path::Path| {
        vec![
            "costs".to_string(),
            "--n".into(),
            "4,6".into(),
            "--alpha".into(),
            "0.25,0.01".into(),
            "--delta".into(),
            "1e-3,1e-9".into(),
            "--out".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let st = exe().args(args(&a)).status().unwrap();
    assert!(st.success());
    let st = exe().args(args(&b)).env("RAYON_NUM_THREADS", "1").status().unwrap();
    assert!(st.success());
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
    assert_eq!(data_lines(std::str::from_utf8(&x).unwrap()).len(), 1 + 4 * 8);
}

#[test]
fn costs_fig5_grid() {
    let (code, out, _) = run_str(&["costs", "--figure", "fig5"]);
    assert_eq!(code, 0);
    let rows = data_lines(&out);
    let mut pts = figure_points(Figure::Fig5);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    assert_eq!(rows.len(), 1 + pts.len());
    for n in 1..=14 {
        assert!(rows.iter().any(|r| r.starts_with(&format!("improved_pe,{n},"))));
    }
}

#[test]
fn costs_bad_inputs_exit_two() {
    assert_eq!(run_str(&["costs", "--n", "x"]).0, 2);
    assert_eq!(run_str(&["costs", "--alg", "grover"]).0, 2);
    assert_eq!(run_str(&["costs", "--figure", "fig9"]).0, 2);
    assert_eq!(run_str(&["costs", "--alpha", "2"]).0, 2);
    let st = exe().args(["costs", "--out", "/nonexistent/dir/x.csv"]).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn simulate_headline_example() {
    let (code, out, _) = run_str(&[
        "simulate", "--alg", "improved_pe", "--n", "3", "--alpha", "0.3", "--delta", "0.05", "--dim", "8",
        "--seed", "7",
    ]);
    assert_eq!(code, 0);
    let v = json_body(&out);
    assert_eq!(v["version"], VERSION);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["config"]["params"]["seed"], "7");
    assert_eq!(v["pass"], true);
    let succ = v["per_eigenstate_success"].as_array().unwrap();
    assert_eq!(succ.len(), 8);
    assert!(succ.iter().all(|p| p.as_f64().unwrap() >= 0.95));
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--n", "2", "--dim", "4", "--seed", "3", "--uncompute"];
    assert_eq!(run_str(&args).1, run_str(&args).1);
}

#[test]
fn simulate_no_promise_support() {
    let (code, out, _) = run_str(&["simulate", "--no-promise", "--dim", "4"]);
    assert_eq!(code, 0);
    let v = json_body(&out);
    let np = &v["no_promise"];
    let m = np["support"][0].as_u64().unwrap() as usize;
    let lam = np["lambda"].as_f64().unwrap();
    assert_eq!(m, (lam * 8.0).floor() as usize);
    assert!(np["support_mass"].as_f64().unwrap() >= 0.95);
    let frac = lam * 8.0 - m as f64;
    assert!(frac > 0.0 && frac < 0.3);
}

#[test]
fn simulate_other_algorithms() {
    for alg in ["textbook_pe", "improved_ee", "amplitude"] {
        let (code, out, err) = run_str(&["simulate", "--alg", alg, "--n", "2", "--dim", "2", "--delta", "0.1"]);
        assert_eq!(code, 0, "{alg}: {err}");
        assert_eq!(json_body(&out)["pass"], true);
    }
}

#[test]
fn simulate_amplitude_dim_one() {
    let (code, out, _) = run_str(&["simulate", "--alg", "amplitude", "--dim", "1", "--n", "3"]);
    assert_eq!(code, 0);
    let v = json_body(&out);
    assert_eq!(v["amplitude_squared"].as_f64().unwrap(), 0.0);
    let dist = v["estimate_distribution"].as_array().unwrap();
    let mass = dist[0].as_f64().unwrap() + dist[7].as_f64().unwrap();
    assert!(mass >= 0.95);
}

#[test]
fn simulate_budget_guard() {
    let out = exe().args(["simulate", "--n", "7", "--dim", "64"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("4096"));
    assert_eq!(run_str(&["simulate", "--alg", "improved_ee", "--n", "6", "--dim", "64"]).0, 2);
    assert_eq!(run_str(&["simulate", "--dim", "0"]).0, 2);
}

#[test]
fn simulate_reports_failure_with_exit_one() {
    // Large δ makes the textbook plan loose while the threshold is strict.
    let (code, out, _) = run_str(&["simulate", "--alg", "improved_pe", "--n", "2", "--dim", "2", "--delta", "0.999"]);
    let v = json_body(&out);
    let pass = v["pass"].as_bool().unwrap();
    assert_eq!(code, if pass { 0 } else { 1 });
}

#[test]
fn poly_amp_report() {
    let (code, out, _) = run_str(&["poly", "--kind", "amp", "--eta", "0.2", "--delta", "0.01", "--points", "101"]);
    assert_eq!(code, 0);
    let rows = data_lines(&out);
    assert_eq!(rows[0], "x,target,approx,abs_err");
    assert_eq!(rows.len(), 102);
    let mut gap_rows = 0;
    for r in &rows[1..] {
        let f: Vec<&str> = r.split(',').collect();
        let x: f64 = f[0].parse().unwrap();
        if f[1].is_empty() {
            gap_rows += 1;
            assert!((x - 0.5).abs() < 0.2);
        } else {
            assert!(f[3].parse::<f64>().unwrap() <= 0.01);
        }
    }
    assert!(gap_rows > 0);
}

#[test]
fn poly_cos_and_coeffs() {
    let (code, out, _) = run_str(&["poly", "--kind", "cos", "--t", "10", "--eps", "1e-7", "--points", "201"]);
    assert_eq!(code, 0);
    for r in &data_lines(&out)[1..] {
        assert!(r.split(',').nth(3).unwrap().parse::<f64>().unwrap() <= 1e-7);
    }
    let (code, out, _) = run_str(&["poly", "--kind", "sin", "--t", "2", "--coeffs"]);
    assert_eq!(code, 0);
    let rows = data_lines(&out);
    assert_eq!(rows[0], "index,coefficient");
    // Odd function: even-index coefficients vanish.
    let c0: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(c0, 0.0);
    assert_eq!(run_str(&["poly", "--points", "0"]).0, 2);
    assert_eq!(run_str(&["poly", "--eta", "0.7"]).0, 2);
}

#[test]
fn verify_all_suites_pass() {
    let (code, out, _) = run_str(&["verify"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("0 failed"));
    for s in cohest::cli::SUITES {
        assert!(out.contains(&format!("PASS {s}::")), "{s}");
    }
}

#[test]
fn verify_suite_filter() {
    let (code, out, _) = run_str(&["verify", "--suite", "lemma2"]);
    assert_eq!(code, 0);
    let checks: Vec<&str> = out.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|l| l.contains(" lemma2::")));
    assert_eq!(run_str(&["verify", "--suite", "nope"]).0, 2);
}

#[test]
fn verify_injected_tolerance_fails() {
    let out = exe().args(["verify", "--suite", "collapse", "--tolerance-scale", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL collapse::"));
}

#[test]
fn usage_errors_and_version() {
    assert_eq!(exe().arg("frobnicate").status().unwrap().code(), Some(2));
    assert_eq!(exe().status().unwrap().code(), Some(2));
    let out = exe().arg("--version").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(VERSION));
}
