use std::path::Path;
use std::process::Command;

use radhydro_cli::config::parse_config;
use radhydro_cli::run::{run, RunError, LIMIT_SERIES_FILE, SUMMARY_FILE};
use radhydro_cli::{load_config, ConfigError, Mode};

fn cfg(json: &str) -> radhydro_cli::RunConfig {
    parse_config(json, Path::new("t.json"), None).unwrap()
}

const SHORT_SWEEP: &str = r#"{
  "mode": "convergence-study",
  "grid": {"n_dims": 1, "points": 32},
  "fluid": {"mu": 0.01, "lambda": 0.01, "kappa": 0.01},
  "eps_list": [0.1, 0.05, 0.025],
  "t_end": 0.1,
  "output_interval": 0.05
}"#;

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, SHORT_SWEEP).unwrap();
    let c = load_config(&p).unwrap();
    assert_eq!(c.mode, Mode::ConvergenceStudy);
    assert_eq!(c.output_times(), vec![0.0, 0.05, 0.1]);

    let missing = load_config(&dir.path().join("nope.json")).unwrap_err();
    assert!(matches!(missing, ConfigError::Io { .. }));
}

#[test]
fn equilibrium_simulation_keeps_norms_constant() {
    let out = run(
        &cfg(r#"{
          "mode": "simulate-eps",
          "grid": {"n_dims": 2, "points": 16},
          "fluid": {"mu": 0.01, "lambda": 0.01, "kappa": 0.01},
          "eps": 0.05,
          "t_end": 0.05,
          "initial": {"rho": {"mean": 1.0}, "u": [{}, {}], "theta": {"mean": 1.0}}
        }"#),
        None,
    )
    .unwrap();
    let s = out.series("eps_0.05.csv").unwrap();
    for (j, name) in s.columns.iter().enumerate().skip(1) {
        let first = s.rows[0][j];
        for row in &s.rows {
            assert!((row[j] - first).abs() <= 1e-12 * (1.0 + first.abs()), "{name}");
        }
    }
    assert!(out.summary.passed());
}

#[test]
fn sweep_has_one_fit_block_per_family_and_index() {
    let out = run(&cfg(SHORT_SWEEP), Some(2)).unwrap();
    let sum = &out.summary;
    assert_eq!(sum.eps_runs.len(), 3);
    let keys: Vec<(String, u32)> = sum
        .rate_fits
        .iter()
        .map(|b| (b.family.clone(), b.sobolev_index))
        .collect();
    assert_eq!(
        keys,
        vec![
            ("fluid".into(), 0),
            ("fluid".into(), 3),
            ("radiation".into(), 0),
            ("radiation".into(), 3)
        ]
    );
    assert!(out.series(LIMIT_SERIES_FILE).is_some());
    for e in [0.1, 0.05, 0.025] {
        assert!(out.series(&format!("eps_{e}.csv")).is_some());
    }
}

#[test]
fn closure_check_with_eight_ordinates() {
    let out = run(
        &cfg(r#"{"mode": "closure-check", "grid": {"n_dims": 2, "points": 16},
                 "fluid": {"mu": 0.01, "lambda": 0.01, "kappa": 0.01},
                 "closure": {"ordinates": 8}}"#),
        None,
    )
    .unwrap();
    let c = out.summary.closure.as_ref().unwrap();
    assert_eq!(c.ordinates, 8);
    for m in &c.moment_checks {
        assert!(m.zeroth_residual < 1e-10 && m.first_residual < 1e-10);
    }
    assert!(out.summary.passed());
}

#[test]
fn solver_errors_report_where_they_happened() {
    let err = run(
        &cfg(r#"{"mode": "simulate-limit", "grid": {"n_dims": 1, "points": 16},
                 "fluid": {"mu": 0.01, "lambda": 0.01, "kappa": 0.01},
                 "initial": {"rho": {"mean": 1.0}, "u": [{}],
                             "theta": {"mean": 0.05, "modes": [{"k": [1], "cos": 0.1}]}}}"#),
        None,
    )
    .unwrap_err();
    assert!(matches!(err, RunError::Solver { eps: None, .. }));
    let msg = err.to_string();
    assert!(msg.contains("limit run") && msg.contains("t = 0"), "{msg}");
}

fn binary() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_radhydro"));
    c.env("RUST_LOG", "warn").env_remove(radhydro_cli::OUT_ENV);
    c
}

#[test]
fn environment_overrides_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.json");
    std::fs::write(&cfg_path, SHORT_SWEEP).unwrap();
    let out = binary()
        .args(["convergence-study", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path().join("flag"))
        .env(radhydro_cli::OUT_ENV, dir.path().join("env"))
        .output()
        .unwrap();
    assert!(out.status.code().is_some());
    assert!(dir.path().join("env").join(SUMMARY_FILE).exists());
    assert!(!dir.path().join("flag").exists());
}

#[test]
fn exit_status_follows_bounds_and_strictness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.json");
    let impossible = SHORT_SWEEP.replace("\"t_end\"", "\"bounds\": {\"fluid_slope\": [5.0, 6.0]}, \"t_end\"");
    std::fs::write(&cfg_path, impossible).unwrap();
    let go = |extra: &[&str]| {
        binary()
            .args(["convergence-study", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(dir.path().join("o"))
            .args(extra)
            .output()
            .unwrap()
    };
    let strict = go(&[]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&strict.stdout).contains("FAIL  fluid_slope_s3"));
    assert_eq!(go(&["--strict", "false"]).status.code(), Some(0));
    assert_eq!(go(&["--strict"]).status.code(), Some(1));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o").join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary["exit_status"], 1);
    assert!(summary.get("wall_time_seconds").is_none());
}

#[test]
fn invalid_config_and_mode_mismatch_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.json");
    std::fs::write(&cfg_path, SHORT_SWEEP.replace("\"t_end\"", "\"colour\": 1, \"t_end\"")).unwrap();
    let out = binary()
        .args(["convergence-study", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    std::fs::write(&cfg_path, SHORT_SWEEP).unwrap();
    let out = binary()
        .args(["simulate-limit", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
