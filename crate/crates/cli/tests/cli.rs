use std::process::Command as Process;

use ortholab::grid::GridFunction;
use ortholab_cli::config::{BoundaryPreset, ExactSolution, SourcePreset};
use ortholab_cli::{run, Command, ErrorKind, RunConfig, Status};
use serde_json::Value;

fn exe(args: &[&str]) -> (i32, String, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_ortholab")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn with(command: Command) -> RunConfig {
    RunConfig {
        command: Some(command),
        ..RunConfig::default()
    }
}

#[test]
fn exponents_example() {
    let (code, stdout, _) = exe(&["exponents", "--N", "2", "--ell", "1", "--p", "2", "--q", "4"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["output"]["verdict"], "FullDifferentiability(1)");
    assert_eq!(v["output"]["conditions_ok"], true);
    let trace = v["output"]["trace"].as_array().unwrap();
    assert_eq!(trace[0]["t"], 0.5);
    for key in ["k", "alpha", "t", "gamma", "chi"] {
        assert!(trace[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn low_dimensional_scans_are_admissible() {
    for n in [2usize, 3] {
        for ell in 1..n {
            let mut cfg = with(Command::RegionScan);
            cfg.scan.n = n;
            cfg.scan.ell = ell;
            let report = run(&cfg).unwrap();
            let rows = report.output["rows"].as_array().unwrap();
            assert_eq!(rows.len(), 81);
            assert!(rows.iter().all(|r| r["conditions_ok"] == true), "N={n} ell={ell}");
        }
    }
}

#[test]
fn region_scan_csv_has_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let (code, _, _) = exe(&[
        "region-scan", "--N", "6", "--ell", "2", "--p-steps", "3", "--q-steps", "4", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,q,conditions_ok,verdict,L");
    assert_eq!(lines.len(), 1 + 12);
}

#[test]
fn unknown_keys_are_rejected() {
    let err = RunConfig::from_toml("seed = 1\n[problem]\nnodez = [3]\n").unwrap_err();
    assert_eq!(err.kind, ErrorKind::Config);
    assert!(err.message.contains("nodez"), "{}", err.message);
    assert!(RunConfig::from_toml("colour = 1\n").is_err());
    assert!(RunConfig::from_toml("[problem.source]\nkind = \"sin_cos\"\nfrequency = 2\n").is_err());
}

#[test]
fn config_round_trips_through_toml() {
    let mut cfg = with(Command::Solve);
    cfg.problem.eps_schedule = Some(vec![0.1, 0.01]);
    cfg.problem.source = SourcePreset::SinCos { amplitude: 3.0 };
    cfg.problem.boundary = BoundaryPreset::Affine {
        slope: vec![1.0, -2.0],
        offset: 0.5,
    };
    cfg.problem.exact = Some(ExactSolution::Paraboloid);
    let text = cfg.to_toml();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "seed = 5\n[profile]\nN = 6\nell = 2\np = 2.0\nq = 3.0\n").unwrap();
    let (code, stdout, _) = exe(&["exponents", "--config", path.to_str().unwrap(), "--q", "4", "--seed", "9"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["output"]["profile"]["N"], 6);
    assert_eq!(v["output"]["profile"]["q"], 4.0);
    assert_eq!(v["output"]["conditions"]["boundary"], true);
}

#[test]
fn report_keys_are_sorted() {
    let report = run(&with(Command::Exponents)).unwrap();
    let json = report.to_json();
    let v: Value = serde_json::from_str(&json).unwrap();
    fn check(v: &Value) {
        match v {
            Value::Object(m) => {
                let keys: Vec<&String> = m.keys().collect();
                let mut sorted = keys.clone();
                sorted.sort();
                assert_eq!(keys, sorted);
                m.values().for_each(check);
            }
            Value::Array(a) => a.iter().for_each(check),
            _ => {}
        }
    }
    check(&v);
    assert!(report.payload().get("timings").is_none());
    assert!(report.to_value().get("timings").is_some());
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(exe(&["exponents", "--N", "3", "--ell", "3"]).0, 2);
    assert_eq!(exe(&["besov-estimate"]).0, 2);
    assert_eq!(exe(&["solve", "--nodes", "9"]).0, 2);
    assert_eq!(exe(&["probe", "--levels", "9,17"]).0, 2);
    let (code, _, stderr) = exe(&["solve", "--exponents", "2,1.5", "--nodes", "9,9"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("configuration error"), "{stderr}");
}

#[test]
fn unconverged_solve_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[problem.source]\nkind = \"sin_cos\"\n").unwrap();
    let (code, stdout, _) = exe(&[
        "solve", "--config", cfg.to_str().unwrap(), "--nodes", "17,17", "--solver-max-iter", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["status"], "numerical_failure");
}

#[test]
fn failing_probe_exits_with_four() {
    // refinement of white noise: the W^{1,2} numbers blow up
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    let mut state = 12345u64;
    for n in [17usize, 33, 65] {
        let h = 2.0 / (n - 1) as f64;
        let values = (0..n * n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let g = GridFunction::new(vec![n, n], vec![h, h], vec![-1.0, -1.0], values).unwrap();
        let p = dir.path().join(format!("u{n}.grid"));
        g.write(&p).unwrap();
        paths.push(p.to_string_lossy().into_owned());
    }
    let mut args = vec!["probe"];
    args.extend(paths.iter().map(String::as_str));
    let (code, stdout, _) = exe(&args);
    assert_eq!(code, 4);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["status"], "verdict_fail");
    assert_eq!(v["output"]["report"]["pass"], false);
}

#[test]
fn manufactured_solve_reports_its_error() {
    let mut cfg = with(Command::Solve);
    cfg.problem.nodes = vec![33, 33];
    cfg.problem.source = SourcePreset::ParaboloidManufactured;
    cfg.problem.boundary = BoundaryPreset::Paraboloid;
    cfg.problem.exact = Some(ExactSolution::Paraboloid);
    let report = run(&cfg).unwrap();
    assert_eq!(report.status, Status::Ok);
    let err = report.output["max_error"].as_f64().unwrap();
    assert!(err < 5e-3, "{err}");
    assert!(report.output["residual_inf"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn solution_grid_feeds_besov_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("u.grid");
    let (code, _, _) = exe(&["solve", "--nodes", "65,65", "--eps", "0.01", "--grid", grid.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, stdout, stderr) = exe(&["besov-estimate", grid.to_str().unwrap(), "--axis", "1", "--second"]);
    assert_eq!(code, 0, "{stderr}");
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["output"]["lags"], serde_json::json!([1, 2, 4, 8, 16]));
    assert_eq!(v["output"]["quotients"].as_array().unwrap().len(), 5);
    assert_eq!(v["output"]["difference"], "Second");
}

#[test]
fn inequalities_use_the_config_seed() {
    let mut cfg = with(Command::Inequalities);
    cfg.inequalities.samples = 500;
    cfg.seed = 1;
    let a = run(&cfg).unwrap();
    cfg.seed = 2;
    let b = run(&cfg).unwrap();
    assert_eq!(a.output["fuzz"]["seed"], 1);
    assert_ne!(a.output["fuzz"]["min_scaled_gap"], b.output["fuzz"]["min_scaled_gap"]);
    assert_eq!(a.status, Status::Ok);
}
