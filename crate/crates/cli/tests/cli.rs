use std::process::{Command, Output};

use serde_json::Value;

fn samlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_samlab")).args(args).output().expect("spawn samlab")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp").expect("timestamp field");
    v
}

#[test]
fn break_round_reports_two_openings_rate() {
    let v = json(&samlab(&["break-round", "--n", "12", "--rounds", "4", "--trials", "100", "--seed", "7"]));
    let rate = v["result"]["two_openings_rate"].as_f64().unwrap();
    assert!(rate >= 0.4, "rate {rate}");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["config"]["d"], 4);
    assert_eq!(v["result"]["binding"]["normal_form_failures"], 0);
    assert!(v["code_version"].is_string());
}

#[test]
fn same_seed_same_output_modulo_timestamp() {
    let args = ["alphabeta", "--trials", "100", "--seed", "11"];
    let a = without_timestamp(json(&samlab(&args)));
    let b = without_timestamp(json(&samlab(&args)));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = without_timestamp(json(&samlab(&["alphabeta", "--trials", "100", "--seed", "12"])));
    assert_ne!(a["result"], c["result"]);
}

#[test]
fn thread_count_does_not_change_results() {
    let one = json(&samlab(&["reconstruct", "--n", "5", "--trials", "6", "--seed", "3", "--threads", "1"]));
    let four = json(&samlab(&["reconstruct", "--n", "5", "--trials", "6", "--seed", "3", "--threads", "4"]));
    assert_eq!(one["result"], four["result"]);
}

#[test]
fn invert_tradeoff_writes_csv_curve() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let out = dir.path().join("out.json");
    let status = samlab(&[
        "invert-tradeoff",
        "--n",
        "12",
        "--depths",
        "1,2,3,4,6,12",
        "--trials",
        "60",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("d,v,predicted,multiplier,budget,success"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6 * 9);
    for d in [1.0, 2.0, 3.0, 4.0, 6.0, 12.0] {
        let curve: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] == d).collect();
        assert!(curve.windows(2).all(|w| w[0][5] <= w[1][5]), "success curve not monotone at d = {d}");
        assert!(curve.last().unwrap()[5] > 0.99);
    }
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for p in v["result"]["points"].as_array().unwrap() {
        let r = p["ratio"].as_f64().unwrap();
        assert!((0.25..=4.0).contains(&r), "knee ratio {r}");
    }
}

#[test]
fn config_file_uses_flag_keys_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 10\nrounds = 3\ntrials = 20\nseed = 5\nhardness_s = 1024.0\n").unwrap();
    let v = json(&samlab(&["break-round", "--config", cfg.to_str().unwrap(), "--trials", "30"]));
    assert_eq!(v["config"]["n"], 10);
    assert_eq!(v["config"]["d"], 3);
    assert_eq!(v["config"]["trials"], 30);
    assert_eq!(v["config"]["hardness_s"], 1024.0);
    assert_eq!(v["result"]["binding"]["trials"], 30);
}

#[test]
fn usage_and_budget_exit_codes() {
    assert_eq!(samlab(&["break-round", "--eps", "2"]).status.code(), Some(2));
    assert_eq!(samlab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(samlab(&["hiding-estimate", "--scheme", "other"]).status.code(), Some(2));
    assert_eq!(samlab(&["pir-com", "--n", "16", "--k", "12", "--d", "4"]).status.code(), Some(2));
    let big = samlab(&["invert-tradeoff", "--n", "30"]);
    assert_eq!(big.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&big.stderr).contains("budget"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "unknown_key = 1\n").unwrap();
    assert_eq!(samlab(&["sam-demo", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}
