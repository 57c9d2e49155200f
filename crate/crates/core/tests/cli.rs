use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

const SCENARIO: &str = r#"
[topology]
regions = 9
[fleet]
uav_count = 2
sources = [3, 1]
destinations = [3, 9]
[horizon]
slots = 6
"#;

fn uavplan(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_uavplan")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "uavplan {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_scenario(dir: &Path) -> String {
    let path = dir.join("s.toml");
    fs::write(&path, SCENARIO).unwrap();
    path.to_str().unwrap().to_owned()
}

fn check_routes(v: &Value, slots: u64) {
    for route in v["routes"].as_array().unwrap() {
        let stops = route.as_array().unwrap();
        assert!(!stops.is_empty());
        assert_eq!(stops[0][1], 1);
        assert_eq!(stops.last().unwrap()[1], slots);
    }
}

#[test]
fn solve_sp_prints_one_line_per_uav() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path());
    let all = uavplan(&["solve-sp", "--scenario", &s]);
    assert_eq!(all.lines().count(), 2);
    let one: Value = serde_json::from_str(uavplan(&["solve-sp", "--scenario", &s, "--uav", "2"]).trim()).unwrap();
    assert_eq!(one["uav"], 2);
    let route = one["route"].as_array().unwrap();
    assert_eq!(route[0], serde_json::json!([1, 1]));
    assert_eq!(route.last().unwrap(), &serde_json::json!([9, 6]));
    assert!(one["payoff"].is_f64());
}

#[test]
fn solver_outputs_have_documented_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path());

    let crs: Value = serde_json::from_str(&uavplan(&["solve-crs", "--scenario", &s])).unwrap();
    assert_eq!(crs["states"], 91);
    assert!(crs["total_payoff"].is_f64() && crs["runtime_ms"].is_f64());
    check_routes(&crs, 6);

    let drs: Value = serde_json::from_str(&uavplan(&[
        "solve-drs", "--scenario", &s, "--seed", "4", "--order", "random",
    ]))
    .unwrap();
    assert_eq!(drs["is_nash"], true);
    assert_eq!(drs["payoffs"].as_array().unwrap().len(), 2);
    let trace: Vec<f64> = drs["potential_trace"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(trace.windows(2).all(|w| w[1] > w[0]));
    assert!(drs["rounds"].as_u64().unwrap() >= 1);
    check_routes(&drs, 6);

    for cmd in ["solve-gp", "solve-cp"] {
        let v: Value = serde_json::from_str(&uavplan(&[cmd, "--scenario", &s])).unwrap();
        let payoffs: f64 = v["payoffs"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((payoffs - v["total_payoff"].as_f64().unwrap()).abs() < 1e-6);
        check_routes(&v, 6);
    }
}

#[test]
fn dumps_demand_and_rewards() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path());
    let demand = dir.path().join("demand.csv");
    let rewards = dir.path().join("rewards.csv");
    uavplan(&[
        "solve-sp",
        "--scenario",
        &s,
        "--dump-demand",
        demand.to_str().unwrap(),
        "--dump-rewards",
        rewards.to_str().unwrap(),
    ]);
    let mut r = csv::Reader::from_path(&demand).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["region", "slot", "expected_users"]);
    assert_eq!(r.records().count(), 9 * 6);
    let mut r = csv::Reader::from_path(&rewards).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["uav", "region", "slot", "reward"]);
    assert_eq!(r.records().count(), 2 * 9 * 6);
}

#[test]
fn bench_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bench.toml");
    fs::write(
        &spec,
        r#"
[[experiment]]
name = "fig5_power"
solvers = ["drs", "gp", "cp"]
trials = 2
sweep = { parameter = "tx_power_dbm", values = [10.0, 30.0] }
[experiment.scenario.horizon]
slots = 6

[[experiment]]
name = "fig9_convergence"
kind = "convergence"
solvers = ["drs"]
trials = 1
sweep = { parameter = "uav_count", values = [3.0] }
[experiment.randomize]
endpoints = "control"
[experiment.scenario.horizon]
slots = 6
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    uavplan(&["bench", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let mut r = csv::Reader::from_path(out.join("fig5_power.csv")).unwrap();
    let headers: Vec<String> = r.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(
        headers,
        [
            "solver",
            "parameter",
            "value",
            "trials",
            "failed",
            "total_payoff",
            "payoff_per_uav",
            "energy_j",
            "efficiency",
            "rounds"
        ]
    );
    assert_eq!(r.records().count(), 6);
    let mut r = csv::Reader::from_path(out.join("fig9_convergence.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap(),
        vec!["value", "iteration", "uav", "payoff", "potential"]
    );
    assert!(r.records().count() >= 3);
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiments"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_uavplan"))
        .args(["solve-sp", "--scenario", "/nonexistent/s.toml"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("loading scenario"));
}
