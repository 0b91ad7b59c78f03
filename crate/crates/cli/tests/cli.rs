//! End-to-end checks of the `adavol` binary: file outputs, round-tripping
//! through the ingestion layer, determinism, and exit codes.

use std::path::Path;
use std::process::Command;

fn adavol() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adavol"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("cannot read {path:?}: {e}"))
}

#[test]
fn help_succeeds() {
    let out = adavol().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["simulate", "fit", "compare", "bench"] {
        assert!(text.contains(sub), "missing subcommand {sub} in help");
    }
}

#[test]
fn bad_flags_exit_with_2() {
    let out = adavol().args(["simulate", "--order", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = adavol().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // stationarity-violating fixed truth is a numerical failure: exit 3
    let dir = tempfile::tempdir().unwrap();
    let out = adavol()
        .args(["simulate", "--order", "1,1", "--n", "10", "--runs", "1"])
        .args(["--theta0", "1.0,0.6,0.6", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_writes_runs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = adavol()
        .args(["simulate", "--order", "1,0", "--n", "10", "--runs", "2", "--seed", "7"])
        .args(["--theta0", "2.0,0.6", "--burn-in", "50", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["runs"], 2);
    assert_eq!(manifest["entries"].as_array().unwrap().len(), 2);
    let csv = read(&dir.path().join("run_0000.csv"));
    assert_eq!(csv.lines().count(), 11); // header + 10 rows
    assert!(csv.starts_with("t,x,true_vol2"));
}

#[test]
fn simulate_is_deterministic_given_seed() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let out = adavol()
            .args(["simulate", "--order", "1,1", "--n", "50", "--runs", "1", "--seed", "11"])
            .args(["--theta0", "random", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
        read(&dir.path().join("run_0000.csv"))
    };
    assert_eq!(run(), run());
}

#[test]
fn fit_adavol_consumes_simulated_output() {
    let dir = tempfile::tempdir().unwrap();
    let status = adavol()
        .args(["simulate", "--order", "1,0", "--n", "400", "--runs", "1", "--seed", "3"])
        .args(["--theta0", "1.0,0.5", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let fit_dir = dir.path().join("fit");
    let out = adavol()
        .args(["fit", "--method", "adavol", "--order", "1,0", "--init", "0.3"])
        .args(["--input"])
        .arg(dir.path().join("run_0000.csv"))
        .args(["--out"])
        .arg(&fit_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = read(&fit_dir.join("trajectory.csv"));
    assert!(traj.starts_with("t,alpha_1,gamma2,next_vol2"));
    assert_eq!(traj.lines().count(), 401);
    let preds = read(&fit_dir.join("predictions.csv"));
    assert!(preds.starts_with("t,x,vol2"));
    let summary: serde_json::Value = serde_json::from_str(&read(&fit_dir.join("summary.json"))).unwrap();
    assert_eq!(summary["method"], "adavol");
    assert_eq!(summary["n"], 400);
    assert!(summary["report"]["qs"].as_f64().unwrap() > 0.0);
}

#[test]
fn fit_batch_single_block_fallback_warns() {
    let dir = tempfile::tempdir().unwrap();
    adavol()
        .args(["simulate", "--order", "1,0", "--n", "300", "--runs", "1", "--seed", "5"])
        .args(["--theta0", "1.0,0.4", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    let fit_dir = dir.path().join("fit");
    let out = adavol()
        .args(["fit", "--method", "batch", "--order", "1,0", "--init", "0.8,0.3"])
        .args(["--increment", "2000", "--input"])
        .arg(dir.path().join("run_0000.csv"))
        .args(["--out"])
        .arg(&fit_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("single fit"));
    let summary: serde_json::Value = serde_json::from_str(&read(&fit_dir.join("summary.json"))).unwrap();
    assert_eq!(summary["blocks"], 1);
}

#[test]
fn fit_reads_price_csv() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    let mut body = String::from("date,close\n");
    let mut price = 100.0f64;
    for day in 1..=120 {
        price *= (0.01 * ((day as f64 * 0.7).sin())).exp();
        body.push_str(&format!("2020-{:02}-{:02},{price}\n", (day - 1) / 28 + 1, (day - 1) % 28 + 1));
    }
    std::fs::write(&prices, body).unwrap();
    let fit_dir = dir.path().join("fit");
    let out = adavol()
        .args(["fit", "--method", "adavol", "--order", "1,1", "--init", "0.1,0.8"])
        .args(["--format", "prices", "--input"])
        .arg(&prices)
        .args(["--out"])
        .arg(&fit_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let preds = read(&fit_dir.join("predictions.csv"));
    assert_eq!(preds.lines().count(), 120); // header + 119 returns
}

#[test]
fn compare_writes_reports_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let out = adavol()
        .args(["compare", "--order", "1,0", "--n", "600", "--runs", "2", "--seed", "1"])
        .args(["--increment", "300", "--alphas", "0.1,0.5,0.9", "--jobs", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = read(&dir.path().join("runs.csv"));
    assert_eq!(runs.lines().count(), 5); // header + 2 runs x 2 methods
    assert!(runs.starts_with("run,method,n,mpe,mape,mae,qs"));
    let agg: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("aggregates.json"))).unwrap();
    for method in ["adavol", "batch"] {
        for metric in ["mpe", "mape", "mae", "qs"] {
            assert!(
                agg["summary"][method][metric]["median"].is_number(),
                "missing {method}/{metric}"
            );
        }
    }
}

#[test]
fn compare_is_deterministic_across_job_counts() {
    let run = |jobs: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = adavol()
            .args(["compare", "--order", "1,0", "--n", "500", "--runs", "3", "--seed", "9"])
            .args(["--increment", "250", "--alphas", "0.25,0.75", "--jobs", jobs, "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        read(&dir.path().join("runs.csv"))
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn bench_reports_relative_speed() {
    let dir = tempfile::tempdir().unwrap();
    let out = adavol()
        .args(["bench", "--orders", "1,0", "--n", "120", "--repeats", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_str(&read(&dir.path().join("bench.json"))).unwrap();
    let row = &rows.as_array().unwrap()[0];
    assert_eq!(row["n"], 120);
    // the streaming pass is the fastest method by construction
    assert_eq!(row["adavol_ratio"], 1.0);
    assert!(row["batch_ratio"].as_f64().unwrap() >= 1.0);
}
