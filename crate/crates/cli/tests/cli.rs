use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_pce");

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    run_env(args, stdin, &[])
}

fn run_env(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args)
        .env("RUST_LOG", "error")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("spawn pce");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn with_config(cmd: &str, cfg: &Value, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", "-"];
    args.extend_from_slice(extra);
    run(&args, Some(&cfg.to_string()))
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn engine(q: Value) -> Value {
    json!({"q_factor": q, "lamb": 1e5, "tau": 1e-6, "rate": 1e6})
}

fn cycle_config(t_h: f64, t_l: f64, q: Value) -> Value {
    json!({
        "engine": engine(q),
        "hot": {"t": t_h, "nu": 1e10},
        "cold": {"t": t_l, "nu": 1e10},
        "nu1": 2e10,
        "nu2": 1e10
    })
}

fn coherent_prep(xi: f64) -> Value {
    json!({"p_e": 0.01, "c1": {"re": 0.98f64.sqrt()}, "c2": {"re": 0.1}, "xi": {"re": xi}, "phase": std::f64::consts::PI})
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn steady_state_ground_atoms_leave_vacuum() {
    let cfg = json!({
        "engine": {"nu": 1.0, "q_factor": 100.0, "lamb": 1.0, "tau": 0.1, "rate": 10.0, "n_max": 20},
        "prep": {"p_e": 0.0, "c1": {"re": 1.0}, "c2": {"re": 0.0}, "xi": {"re": 0.0}}
    });
    let v = stdout_json(&with_config("steady-state", &cfg, &[]));
    assert_eq!(f(&v["mean_photon"]), 0.0);
    assert_eq!(f(&v["analytic_mean_photon"]), 0.0);
    assert_eq!(f(&v["relative_gap"]), 0.0);
    assert_eq!(v["populations"].as_array().unwrap().len(), 21);
}

#[test]
fn steady_state_thermal_atoms_match_rate_equation() {
    // ħν/kT = ln 2 gives p_e = 1/5 and <n> = 1
    let t = 1.054_571_817e-34 / (1.380_649e-23 * std::f64::consts::LN_2);
    let cfg = json!({
        "engine": {"nu": 1.0, "q_factor": "inf", "lamb": 1.0, "tau": 0.1, "rate": 10.0},
        "t": t,
        "prep": {"thermal": true}
    });
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("rho.json");
    let v = stdout_json(&with_config(
        "steady-state",
        &cfg,
        &["--dump-state", dump.to_str().unwrap()],
    ));
    assert!((f(&v["analytic_mean_photon"]) - 1.0).abs() < 1e-12);
    assert!(f(&v["relative_gap"]) <= 0.02);
    let state: Value = serde_json::from_str(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(state["n_max"], 60);
    assert_eq!(state["re"].as_array().unwrap().len(), 61);
}

#[test]
fn steady_state_runaway_gain_exits_3() {
    let c = 0.275f64.sqrt();
    let cfg = json!({
        "engine": {"nu": 1.0, "q_factor": "inf", "lamb": 1.0, "tau": 0.1, "rate": 10.0},
        "prep": {"p_e": 0.45, "c1": {"re": c}, "c2": {"re": c}, "xi": {"re": 0.0}}
    });
    let out = with_config("steady-state", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(
        stderr(&out).contains("maser threshold exceeded"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn cycle_dephased_lossless_is_carnot() {
    let v = stdout_json(&with_config(
        "cycle",
        &cycle_config(600.0, 300.0, json!("inf")),
        &[],
    ));
    assert!((f(&v["eta"]) - 0.5).abs() < 1e-12);
    assert!((f(&v["limits"]["dephased"]) - 0.5).abs() < 1e-12);
}

#[test]
fn cycle_coherent_single_bath_does_work() {
    let mut cfg = cycle_config(300.0, 300.0, json!("inf"));
    cfg["hot"]["prep"] = coherent_prep(1.0);
    let v = stdout_json(&with_config("cycle", &cfg, &[]));
    assert!(f(&v["eta"]) > 0.0);
    assert!(f(&v["work"]) > 0.0);
    assert_eq!(v["positive_work"], true);
}

#[test]
fn malformed_config_names_the_field() {
    let mut cfg = cycle_config(600.0, 300.0, json!("inf"));
    cfg["hot"]["t"] = json!("hot");
    let out = with_config("cycle", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("hot.t"), "{}", stderr(&out));

    let out = with_config(
        "cycle",
        &cycle_config(600.0, 300.0, json!("inf")),
        &["--set", "engine.q_factor=warm"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("engine.q_factor"), "{}", stderr(&out));

    let out = run(&["cycle", "--config", "-"], Some("{not json"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn physics_errors_exit_3() {
    let mut cfg = cycle_config(600.0, 300.0, json!("inf"));
    cfg["hot"]["prep"] = json!({"p_e": 0.45, "c1": {"re": 0.275f64.sqrt()}, "c2": {"re": 0.275f64.sqrt()}, "xi": {"re": 0.0}});
    assert_eq!(with_config("cycle", &cfg, &[]).status.code(), Some(3));
}

fn sweep_column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().to_string())
        .collect()
}

#[test]
fn q_sweep_is_monotone() {
    let cfg = cycle_config(600.0, 300.0, json!(1e9));
    let out = with_config(
        "sweep",
        &cfg,
        &[
            "--param",
            "q_factor",
            "--grid",
            "1e7,1e8,1e9,1e10,1e11,1e12,inf",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let eta: Vec<f64> = sweep_column(&csv, "eta")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(eta.len(), 7);
    assert!(eta.windows(2).all(|w| w[1] >= w[0]), "{eta:?}");
    assert_eq!(eta[6], 0.5);
}

#[test]
fn xi_sweep_falls_to_classical() {
    let mut cfg = cycle_config(600.0, 300.0, json!("inf"));
    cfg["hot"]["prep"] = coherent_prep(1.0);
    cfg["sweep"] = json!({"param": "xi", "grid": [1.0, 0.75, 0.5, 0.25, 0.0]});
    let out = with_config("sweep", &cfg, &["--format", "json"]);
    let rows = stdout_json(&out);
    let eta: Vec<f64> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| f(&r["report"]["eta"]))
        .collect();
    assert!(eta.windows(2).all(|w| w[1] < w[0]), "{eta:?}");
    assert!((eta[4] - 0.5).abs() < 1e-12);
}

#[test]
fn sweep_records_point_errors_and_continues() {
    let mut cfg = cycle_config(600.0, 300.0, json!("inf"));
    cfg["hot"]["prep"] = coherent_prep(1.0);
    let out = with_config("sweep", &cfg, &["--param", "xi", "--grid", "0.5,1.5"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let errors = sweep_column(&csv, "error");
    assert_eq!(errors[0], "");
    assert!(csv.lines().nth(2).unwrap().contains("exceeds 1"));
}

#[test]
fn empty_or_unordered_grid_exits_2() {
    let mut cfg = cycle_config(600.0, 300.0, json!("inf"));
    cfg["sweep"] = json!({"param": "q_factor", "grid": []});
    assert_eq!(with_config("sweep", &cfg, &[]).status.code(), Some(2));
    assert_eq!(
        with_config("sweep", &cfg, &["--grid", ""]).status.code(),
        Some(2)
    );
    assert_eq!(
        with_config("sweep", &cfg, &["--grid", "1e3,1e5,1e4"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sweep_output_is_independent_of_thread_count() {
    let cfg = cycle_config(600.0, 300.0, json!(1e9));
    let grid = (0..40)
        .map(|i| format!("{}", 10f64.powf(6.0 + 0.15 * i as f64)))
        .collect::<Vec<_>>()
        .join(",");
    let args = [
        "sweep", "--config", "-", "--param", "q_factor", "--grid", &grid,
    ];
    let one = run_env(&args, Some(&cfg.to_string()), &[("PCE_NUM_THREADS", "1")]);
    let many = run_env(&args, Some(&cfg.to_string()), &[("PCE_NUM_THREADS", "4")]);
    assert!(one.status.success() && many.status.success());
    assert_eq!(one.stdout, many.stdout);
    let bad = run_env(
        &args,
        Some(&cfg.to_string()),
        &[("PCE_NUM_THREADS", "zero")],
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn ts_diagram_matches_cycle() {
    let cfg = cycle_config(600.0, 300.0, json!("inf"));
    let out = with_config("ts-diagram", &cfg, &["--points", "6"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(!csv.contains('\r'));
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 24);
    // stroke end points collapse onto the 4 rectangle corners
    let end_points: std::collections::BTreeSet<(u64, u64)> = rows
        .iter()
        .filter(|r| r[1] == 0.0 || r[1] == 5.0)
        .map(|r| (r[2].to_bits(), r[3].to_bits()))
        .collect();
    assert_eq!(end_points.len(), 4);
    assert!(rows.iter().filter(|r| r[0] == 1.0).all(|r| r[3] == 600.0));

    let report = stdout_json(&with_config("cycle", &cfg, &[]));
    for (i, corner) in report["corners"].as_array().unwrap().iter().enumerate() {
        let s = f(&corner["entropy"]);
        let row = rows
            .iter()
            .find(|r| r[0] == (i + 1) as f64 && r[1] == 0.0)
            .unwrap();
        assert!(((row[2] - s) / s).abs() <= 1e-12);
    }
}

#[test]
fn feasibility_table() {
    let v = stdout_json(&run(&["feasibility"], None));
    let loss: Vec<f64> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| f(&r["loss_term"]))
        .collect();
    assert!((loss[0] - 1.0).abs() < 1e-12);
    assert!((loss[1] - 0.1).abs() < 1e-12);
    assert!((loss[2] - 1.0).abs() < 1e-12);
    let orders: Vec<i64> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["loss_order"].as_i64().unwrap())
        .collect();
    assert_eq!(orders, [0, -1, 0]);

    let v = stdout_json(&run(
        &["feasibility", "microwave", "--set", "q_max=1e10"],
        None,
    ));
    assert!((f(&v[0]["loss_term"]) - 0.01).abs() < 1e-14);

    assert_eq!(
        run(&["feasibility", "trapped-ion"], None).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["feasibility", "--set", "bogus=1"], None)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let cfg = configs().join("coherent_single_bath.json");
    for p in [&a, &b] {
        let out = run(
            &[
                "cycle",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                p.to_str().unwrap(),
            ],
            None,
        );
        assert!(out.status.success(), "{}", stderr(&out));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn shipped_configs_run() {
    for (cmd, file) in [
        ("cycle", "classical.json"),
        ("cycle", "coherent_single_bath.json"),
        ("sweep", "lossy_sweep.json"),
        ("ts-diagram", "classical.json"),
        ("steady-state", "steady_thermal.json"),
    ] {
        let path = configs().join(file);
        let out = run(&[cmd, "--config", path.to_str().unwrap()], None);
        assert!(out.status.success(), "{cmd} {file}: {}", stderr(&out));
    }
}

#[test]
fn hertz_units_scale_frequencies() {
    let mut cfg = cycle_config(600.0, 300.0, json!("inf"));
    let rad = stdout_json(&with_config("cycle", &cfg, &[]));
    cfg["units"] = json!("Hz");
    for key in ["nu1", "nu2"] {
        cfg[key] = json!(f(&cfg[key]) / std::f64::consts::TAU);
    }
    for side in ["hot", "cold"] {
        cfg[side]["nu"] = json!(f(&cfg[side]["nu"]) / std::f64::consts::TAU);
    }
    let hz = stdout_json(&with_config("cycle", &cfg, &[]));
    let (a, b) = (f(&rad["corners"][0]["nu"]), f(&hz["corners"][0]["nu"]));
    assert!(((a - b) / a).abs() < 1e-15);
}
