use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BASE: &str = "\
[network]
lambda0 = 1e-6
h = 100.0
alpha = 3.0

[mobility]
v = 12.5
w = 5.0
s = 250.0

[sim]
r_obs = 4000.0
trials = 300
seed = 9

[run]
u_0 = 500.0
times = [0.0, 40.0]
u_x = \"0:1500:250\"
";

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn srwpnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srwpnet")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let cfg = cfg.to_str().unwrap();
    for cmd in [
        &["density", "--mc"][..],
        &["simulate"][..],
        &["rate", "--mc", "--set", "run.model=uim"][..],
    ] {
        let mut outs = Vec::new();
        for (i, seed) in ["42", "42", "43"].into_iter().enumerate() {
            let out = dir.path().join(format!("{}{i}.csv", cmd[0]));
            let mut args = cmd.to_vec();
            args.extend(["--config", cfg, "--seed", seed, "--out", out.to_str().unwrap()]);
            stdout(&srwpnet(&args));
            outs.push(std::fs::read(&out).unwrap());
        }
        assert_eq!(outs[0], outs[1], "{}", cmd[0]);
        assert_ne!(outs[0], outs[2], "{}", cmd[0]);
    }
}

#[test]
fn subcritical_alpha_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BASE.replace("alpha = 3.0", "alpha = 1.5"));
    for cmd in ["density", "rate", "simulate", "validate"] {
        let o = srwpnet(&[cmd, "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(
            err.contains("line 4") && err.contains("alpha") && err.contains("diverges"),
            "{err}"
        );
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn missing_and_malformed_configs_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = srwpnet(&["rate", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(dir.path(), &BASE.replace("[sim]", "[sim]\nthreads = 4"));
    let o = srwpnet(&["rate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 12"));
    let cfg = write_config(dir.path(), BASE);
    let o = srwpnet(&["rate", "--config", cfg.to_str().unwrap(), "--set", "run.times=60,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn density_at_time_zero_is_a_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let csv = stdout(&srwpnet(&[
        "density",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "run.times=0",
    ]));
    let r = rows(&csv);
    assert_eq!(r[0], ["t", "u_x", "lambda_ratio_analytic"]);
    assert_eq!(r.len(), 8);
    for row in &r[1..] {
        let u_x: f64 = row[1].parse().unwrap();
        let expected = if u_x <= 500.0 { "0" } else { "1" };
        assert_eq!(row[2], expected, "{row:?}");
    }
}

#[test]
fn density_mc_columns_follow_the_analytic_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let csv = stdout(&srwpnet(&[
        "density",
        "--config",
        cfg.to_str().unwrap(),
        "--mc",
        "--set",
        "run.times=40,300",
        "--set",
        "sim.trials=4000",
    ]));
    let r = rows(&csv);
    assert_eq!(
        r[0],
        ["t", "u_x", "lambda_ratio_analytic", "lambda_ratio_mc", "mc_stderr"]
    );
    for row in &r[1..] {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        if v[1] == 0.0 {
            continue;
        }
        assert!((v[2] - v[3]).abs() < 0.06 + 4.0 * v[4], "{row:?}");
    }
}

#[test]
fn bits_are_nats_over_ln_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let cfg = cfg.to_str().unwrap();
    let nats = rows(&stdout(&srwpnet(&["rate", "--config", cfg, "--set", "run.times=0"])));
    let bits = rows(&stdout(&srwpnet(&[
        "rate",
        "--config",
        cfg,
        "--set",
        "run.times=0",
        "--units",
        "bits",
    ])));
    assert_eq!(nats[0], ["t", "model", "rate", "units", "h"]);
    assert_eq!(nats.len(), 3);
    for (n, b) in nats[1..].iter().zip(&bits[1..]) {
        assert_eq!((n[3].as_str(), b[3].as_str()), ("nats", "bits"));
        let (n, b): (f64, f64) = (n[2].parse().unwrap(), b[2].parse().unwrap());
        assert!((b - n / std::f64::consts::LN_2).abs() < 1e-12 * b);
    }
    // Both models start from the same nearest-drone association.
    let (uim, udm): (f64, f64) = (nats[1][2].parse().unwrap(), nats[2][2].parse().unwrap());
    assert!((uim / udm - 1.0).abs() < 1e-4);
}

#[test]
fn simulate_emits_one_row_per_trial_and_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let csv = stdout(&srwpnet(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "sim.trials=5",
    ]));
    let r = rows(&csv);
    assert_eq!(r[0], ["model", "trial", "t", "sir", "serving_distance", "interference"]);
    assert_eq!(r.len(), 1 + 2 * 5 * 2);
    for row in &r[1..] {
        let sir: f64 = row[3].parse().unwrap();
        assert!(sir > 0.0);
        let d: f64 = row[4].parse().unwrap();
        assert!(d >= 100.0);
    }
}

#[test]
fn validate_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &BASE
            .replace("trials = 300", "trials = 2000")
            .replace("r_obs = 4000.0", "r_obs = 50000.0"),
    );
    let cfg = cfg.to_str().unwrap();
    let run = |i: usize| {
        let out = dir.path().join(format!("report{i}.json"));
        let o = srwpnet(&[
            "validate",
            "--config",
            cfg,
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
        (o, std::fs::read(&out).unwrap())
    };
    let (o, first) = run(0);
    let (_, second) = run(1);
    assert_eq!(first, second);
    let report: Vec<serde_json::Value> = serde_json::from_slice(&first).unwrap();
    assert_eq!(report.len(), 14);
    let failed: Vec<&str> = report
        .iter()
        .filter(|c| !c["pass"].as_bool().unwrap())
        .map(|c| c["test"].as_str().unwrap())
        .collect();
    for c in &report {
        let keys: Vec<&String> = c.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["pass", "statistic", "test", "threshold"]);
    }
    // The truncated Rayleigh law for three legs is only approximate.
    assert_eq!(failed, ["z3_ks_distance"]);
    assert_eq!(o.status.code(), Some(1));
}
