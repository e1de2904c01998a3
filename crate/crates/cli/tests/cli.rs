use std::path::Path;
use std::process::{Command, Output};

use qlde::mpoly::DataFile;
use qlde::qpcp::{DecodeReport, ProofFile};
use qlde::{ExperimentConfig, GapInstance, QuantumState, TrialReport, VerdictDistribution};
use serde_json::Value;

fn qlde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlde")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

/// parse → serialize → parse is the identity on the typed value.
fn round_trips<T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug>(text: &str) -> T {
    let a: T = serde_json::from_str(text).unwrap();
    let b: T = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(a, b);
    a
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn data_json() -> String {
    let values: Vec<u16> = (0..16).map(|i| (i * 7 % 16) as u16).collect();
    serde_json::json!({ "params": { "field": { "a": 4, "modulus_bits": 19 }, "d": 2, "h_size": 4 }, "values": values })
        .to_string()
}

const GAP: &str = r#"{"m":2,"s":1,"q":2,"eps":0.5,"predicates":[{"vars":[0,1],"sat":[[0,0],[1,1]]},{"vars":[0,1],"sat":[[0,1],[1,0]]}]}"#;

#[test]
fn encode_round_trips_state() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.json", &data_json());
    round_trips::<DataFile>(&data_json());
    let out = qlde(&["encode", "--data", &data]);
    assert!(out.status.success());
    let state: QuantumState = round_trips(std::str::from_utf8(&out.stdout).unwrap());
    assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn retrieval_commands() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.json", &data_json());
    let out = qlde(&["retrieve-exact", "--data", &data, "--w", "3,5"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let dist: VerdictDistribution = round_trips(&v["distribution"].to_string());
    assert_eq!(dist.0.len(), 1);
    assert_eq!(dist.prob(&v["truth"].as_str().unwrap().parse().unwrap()), 1.0);

    let out = qlde(&["retrieve", "--data", &data, "--w", "3,5", "--w2", "7,1", "--trials", "500"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["wrong"], 0.0);

    let out = qlde(&["retrieve-exact", "--data", &data, "--w", "3,5", "--adversary", "w-flip"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["wrong"], 17.0 * 6.0 / 256.0);

    let out = qlde(&["retrieve-exact", "--data", &data, "--w", "3,5", "--adversary", "nobody"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown adversary"));
}

#[test]
fn qldt_commands() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.json", &data_json());
    let out = qlde(&["qldt-exact", "--data", &data]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["gamma_exact"], 1.0);
    let out = qlde(&["qldt", "--data", &data, "--trials", "300"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["gamma_sampled"], 1.0);
}

#[test]
fn qpcp_prove_verify_exact_decode() {
    let dir = tempfile::tempdir().unwrap();
    round_trips::<GapInstance>(GAP);
    let inst = write(dir.path(), "gap.json", GAP);
    let proof = dir.path().join("proof.json");
    let proof = proof.to_str().unwrap();
    let small = ["--a", "2", "--d", "3", "--h-size", "2"];

    let refused = qlde(&[&["qpcp", "prove", "--instance", &inst, "--assignment", "1,1", "--out", proof][..], &small].concat());
    assert_eq!(refused.status.code(), Some(2));

    let built = qlde(
        &[&["qpcp", "prove", "--instance", &inst, "--assignment", "1,1", "--formatted", "--out", proof][..], &small].concat(),
    );
    assert!(built.status.success());
    round_trips::<ProofFile>(&std::fs::read_to_string(proof).unwrap());

    let exact = qlde(&["qpcp", "exact", "--instance", &inst, "--proof", proof]);
    assert_eq!(stdout_json(&exact)["gamma"], 0.5);

    let verify = qlde(&["qpcp", "verify", "--instance", &inst, "--proof", proof, "--trials", "400"]);
    assert!(verify.status.success());
    let v = stdout_json(&verify);
    assert_eq!(v["blocks_read"], 400);
    assert_eq!(v["one_query"], true);
    assert_eq!(v["projection"], 0);

    let decode = qlde(&["qpcp", "decode", "--instance", &inst, "--proof", proof, "--assert-lemma"]);
    assert!(decode.status.success());
    let rep: DecodeReport = round_trips(std::str::from_utf8(&decode.stdout).unwrap());
    assert_eq!(rep.satisfied_fraction, 0.5);
    assert!(rep.holds);
}

#[test]
fn demo_advice_parity() {
    let table = "0110100110010110";
    for (query, accept) in [("0000", false), ("0111", true), ("1011", true), ("1111", false)] {
        let out = qlde(&["demo-advice", "--table", table, "--query", query]);
        assert!(out.status.success());
        assert_eq!(stdout_json(&out)["accept"], accept);
    }
    let exact = qlde(&["demo-advice", "--table", "0000", "--query", "01", "--exact"]);
    assert_eq!(stdout_json(&exact)["accept_prob"], 0.0);
}

#[test]
fn experiment_is_byte_deterministic_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("report");
    let cfg = serde_json::json!({
        "experiment": "retrieve",
        "seed": 9,
        "trials": 500,
        "adversaries": ["honest", "point-anchored"],
        "output": base,
    })
    .to_string();
    round_trips::<ExperimentConfig>(&cfg);
    let path = write(dir.path(), "cfg.json", &cfg);
    let a = qlde(&["experiment", "--config", &path]);
    let b = qlde(&["experiment", "--config", &path]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rep: TrialReport = round_trips(std::str::from_utf8(&a.stdout).unwrap());
    assert!(rep.passed);
    assert_eq!(std::fs::read(base.with_extension("json")).unwrap(), a.stdout);
    let csv = std::fs::read_to_string(base.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), rep.rows.len() + 1);

    let bad = write(dir.path(), "bad.json", r#"{"experiment": "qldt", "adversaries": ["x"]}"#);
    let out = qlde(&["experiment", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
}

#[test]
fn failing_criteria_set_exit_code() {
    // The full suite includes the w-flip prover, which exceeds r/|F| + |F|^-d.
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"experiment": "retrieve", "mode": "exact", "adversaries": ["w-flip"]}"#;
    let path = write(dir.path(), "cfg.json", cfg);
    let out = qlde(&["experiment", "--config", &path]);
    assert_eq!(out.status.code(), Some(1));
    let rep: TrialReport = serde_json::from_slice(&out.stdout).unwrap();
    let by_name = |n: &str| rep.criteria.iter().find(|c| c.name == n).unwrap().passed;
    assert!(!by_name("soundness:w-flip"));
    assert!(by_name("line-count-bound:w-flip"));
}
