use std::path::Path;
use std::process::{Command, Output};

use parisian_core::ParisianQuery;
use serde_json::Value;

const BM: &[&str] = &["--model", "brownian_drift", "--mu", "0.5", "--sigma", "1"];
const CL: &[&str] = &["--model", "cl", "--mu", "1", "--jump-rate", "1", "--jump-mean", "0.5"];

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_parisian"));
    cmd.args(args).env_remove("PARISIAN_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn with(base: &[&str], rest: &[&str]) -> Vec<String> {
    base.iter().chain(rest).map(|s| s.to_string()).collect()
}

fn run_owned(args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn missing_model_kind_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model.mu = 0.5\nmodel.sigma = 1\n");
    let out = run(&["--config", &cfg, "ruin-lt", "--a", "1", "--r", "1", "--u", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.kind"));
}

#[test]
fn unknown_and_malformed_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "model.kind = bm\nmodel.mu = 0.5\nmodel.sigma = 1\nquad.colour = 3\n",
    );
    let out = run(&["--config", &cfg, "--dry-run", "validate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("quad.colour"));

    let out = run_owned(&with(BM, &["--set", "inv.nodes=4", "--dry-run", "validate"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inv.nodes"));
}

#[test]
fn dry_run_echoes_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "# full file\nmodel.kind = cramer_lundberg_exp\nmodel.mu = 1\nmodel.jump_rate = 1\nmodel.jump_mean = 0.5\n\
         quad.rel_tol = 1e-7\nquad.abs_tol = 1e-11\ninv.nodes = 20\nmc.paths = 5000\nmc.seed = 9\nmc.horizon_cap = 50\n",
    );
    let out = run(&[
        "--config",
        &cfg,
        "--dry-run",
        "ruin-lt",
        "--a",
        "1",
        "--r",
        "0.5",
        "--u",
        "0.5,1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "ruin-lt");
    assert_eq!(v["config"]["model"]["kind"], "cramer_lundberg_exp");
    assert_eq!(v["config"]["quad"]["rel_tol"].as_f64(), Some(1e-7));
    assert_eq!(v["config"]["inv"]["nodes"].as_u64(), Some(20));
    assert_eq!(v["config"]["mc"]["n_paths"].as_u64(), Some(5000));
    assert_eq!(v["config"]["mc"]["mode"], "exact");
    assert_eq!(v["request"].as_array().unwrap().len(), 2);
}

#[test]
fn flag_beats_file_beats_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "model.kind = bm\nmodel.mu = 0.5\nmodel.sigma = 1\nquad.rel_tol = 1e-6\n",
    );
    let rel_tol = |args: &[&str]| json(&run(args))["config"]["quad"]["rel_tol"].as_f64().unwrap();
    assert_eq!(rel_tol(&[BM, &["--dry-run", "validate"]].concat()), 1e-8);
    assert_eq!(rel_tol(&["--config", &cfg, "--dry-run", "validate"]), 1e-6);
    assert_eq!(
        rel_tol(&["--config", &cfg, "--rel-tol", "1e-4", "--dry-run", "validate"]),
        1e-4
    );
    assert_eq!(
        rel_tol(&["--config", &cfg, "--set", "quad.rel_tol=1e-5", "--dry-run", "validate"]),
        1e-5
    );
}

#[test]
fn validate_passes_on_default_config() {
    let out = run_owned(&with(BM, &["validate"]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let checks = json(&out);
    let checks = checks.as_array().unwrap();
    assert!(checks.len() > 40);
    for c in checks {
        for key in ["identity", "params", "lhs", "rhs", "rel_err", "pass"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
        assert_eq!(c["pass"], true, "{c}");
    }
}

#[test]
fn corrupted_tolerance_fails_validation() {
    let out = run_owned(&with(BM, &["--rel-tol", "10", "validate"]));
    assert_eq!(out.status.code(), Some(3));
    let checks = json(&out);
    assert!(checks.as_array().unwrap().iter().any(|c| c["pass"] == false));
}

#[test]
fn validate_csv_has_one_row_per_identity() {
    let json_out = json(&run_owned(&with(BM, &["validate"])));
    let out = run_owned(&with(BM, &["--format", "csv", "validate"]));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "identity,params,lhs,rhs,rel_err,tol,pass");
    assert_eq!(lines.count(), json_out.as_array().unwrap().len());
}

#[test]
fn non_convergence_exits_with_two() {
    let out = run_owned(&with(
        BM,
        &[
            "--set",
            "quad.max_intervals=1",
            "ruin-lt",
            "--a",
            "1",
            "--r",
            "0.5",
            "--u",
            "0.5",
        ],
    ));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(run_owned(&with(BM, &["ruin-lt", "--a", "1"])).status.code(), Some(1));
    assert_eq!(
        run_owned(&with(BM, &["ruin-lt", "--a", "-1", "--r", "1", "--u", "1"]))
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run_owned(&with(BM, &["scale", "--q", "0.5", "--xmax", "0"]))
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run_owned(&with(BM, &["--format", "xml", "validate"])).status.code(),
        Some(1)
    );
}

#[test]
fn json_results_reparse_into_their_queries() {
    let out = run_owned(&with(
        CL,
        &[
            "joint-lt", "--a", "1", "--r", "0.5", "--u", "0.5,1", "--z", "0,1.5", "--nu", "0,0.25", "--x0", "0.3",
        ],
    ));
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let mut expected = Vec::new();
    for z in [0.0, 1.5] {
        for u in [0.5, 1.0] {
            for nu in [0.0, 0.25] {
                expected.push(ParisianQuery::new(1.0, 0.5, u, z).with_tilt(nu, 0.3));
            }
        }
    }
    for (row, want) in rows.iter().zip(expected) {
        let q: ParisianQuery = serde_json::from_value(row.clone()).unwrap();
        assert_eq!(q, want);
        let v = row["value"].as_f64().unwrap();
        assert!(v > 0.0 && v.is_finite());
    }
}

#[test]
fn scale_csv_columns_and_stability() {
    let args = with(
        BM,
        &["--format", "csv", "scale", "--q", "0.5", "--xmax", "3", "--n", "7"],
    );
    let first = run_owned(&args);
    assert_eq!(first.status.code(), Some(0));
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,W,Wprime,Wbar");
    assert_eq!(lines.len(), 8);
    assert!(lines[1].starts_with("0.0000000000000000e0,0.0000000000000000e0,"));
    assert_eq!(run_owned(&args).stdout, first.stdout);

    let numeric = run_owned(&with(
        BM,
        &[
            "--format",
            "csv",
            "scale",
            "--q",
            "0.5",
            "--xmax",
            "3",
            "--n",
            "7",
            "--backend",
            "numeric",
        ],
    ));
    let parse = |bytes: &[u8]| -> Vec<Vec<f64>> {
        String::from_utf8_lossy(bytes)
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
            .collect()
    };
    for (a, b) in parse(&first.stdout).iter().zip(parse(&numeric.stdout)) {
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }
}

#[test]
fn mc_is_reproducible_across_thread_caps() {
    let args = with(
        CL,
        &[
            "--paths", "4000", "--format", "csv", "mc", "--a", "1", "--r", "0.5", "--u", "0.5,1", "--z", "0.5",
        ],
    );
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let one = run_env(&refs, &[("PARISIAN_THREADS", "1")]);
    let two = run_env(&refs, &[("PARISIAN_THREADS", "2")]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(run(&refs).stdout, one.stdout);
    let bad = run_env(&refs, &[("PARISIAN_THREADS", "zero")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("PARISIAN_THREADS"));
}

#[test]
fn compare_reports_agreement() {
    let out = run_owned(&with(
        CL,
        &[
            "--paths", "40000", "compare", "--a", "1", "--r", "0.5", "--u", "0.5", "--z", "0,1.5",
        ],
    ));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for row in json(&out).as_array().unwrap() {
        let gap = (row["formula"].as_f64().unwrap() - row["mc_mean"].as_f64().unwrap()).abs();
        assert!(gap <= row["allowance"].as_f64().unwrap());
        assert_eq!(row["pass"], true);
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let p = path.to_string_lossy().into_owned();
    let out = run_owned(&with(
        CL,
        &[
            "--out", &p, "--format", "csv", "scale", "--q", "0", "--xmax", "1", "--n", "3",
        ],
    ));
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("x,W,Wprime,Wbar\n"));
    // CL: W(0) = 1/c.
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
}
