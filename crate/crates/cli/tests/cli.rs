use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcut"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const CHAIN: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\nh q[0];\ncx q[0],q[1];\ncx q[1],q[2];\n";

const CONFIG: &str = r#"{
  "workers": [
    {"name": "a", "qubits": 3, "p1": 0.001, "p2": 0.01},
    {"name": "b", "qubits": 3, "p1": 0.001, "p2": 0.02}
  ],
  "epr": {"budget": 1, "success_rate": 0.9},
  "reserve": 1
}"#;

#[test]
fn run_writes_versioned_report() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "chain.qasm", CHAIN);
    let cfg = write(dir.path(), "sys.json", CONFIG);
    let out = dir.path().join("r.json");
    let o = qcut(&["run", "--circuit", &c, "--config", &cfg, "--e", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["schema"], "qcut-epr/1");
    assert_eq!(r["merge_plan"]["e"], 0);
    assert!(r["fidelity"].as_f64().unwrap() > 0.9);
    assert!(r.get("wall_time_ms").is_none());
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "chain.qasm", CHAIN);
    let cfg = write(dir.path(), "sys.json", CONFIG);
    let args = ["run", "--circuit", &c, "--config", &cfg, "--mode", "sampled", "--shots", "300", "--seed", "4"];
    let a = qcut(&args);
    let b = qcut(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn subcommands_emit_json() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "chain.qasm", CHAIN);
    let cfg = write(dir.path(), "sys.json", CONFIG);
    for (cmd, key) in [("cut", "cut_plan"), ("plan", "merge_plan"), ("schedule", "placement")] {
        let o = qcut(&[cmd, "--circuit", &c, "--config", &cfg]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v.get(key).is_some(), "{cmd} lacks {key}");
    }
    let o = qcut(&["baseline", "--circuit", &c, "--config", &cfg, "--x", "1", "--dump-counts"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], "random");
    assert!(v["counts"].is_array());
}

#[test]
fn gen_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("bv.json");
    let o = qcut(&["gen", "--kind", "bv", "--qubits", "3", "--secret", "101", "--out", c.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = write(dir.path(), "sys.json", &CONFIG.replace("0.001", "0.0").replace("0.01", "0.0").replace("0.02", "0.0"));
    let o = qcut(&["run", "--circuit", c.to_str().unwrap(), "--config", &cfg, "--e", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["output"]["top"][0][0], "101");
}

#[test]
fn sweep_writes_csv_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "chain.qasm", CHAIN);
    let cfg = write(dir.path(), "sys.json", CONFIG);
    let csv = dir.path().join("s.csv");
    let o = qcut(&[
        "sweep", "--circuit", &c, "--config", &cfg, "--axis", "sr", "--values", "0.9,0.99", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("point,e,SR,workers,seme,seme_pct,fidelity,negativity_mass"));
    assert_eq!(text.lines().count(), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("fidelity"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "chain.qasm", CHAIN);

    let bad = write(dir.path(), "bad.json", r#"{"workers": [], "epr": {"budget": 0, "success_rate": 0.9}}"#);
    assert_eq!(qcut(&["run", "--circuit", &c, "--config", &bad]).status.code(), Some(2));

    let typo = write(dir.path(), "typo.json", r#"{"workers": [{"name": "a", "qubits": "x"}], "epr": {"budget": 0, "success_rate": 0.9}}"#);
    let o = qcut(&["run", "--circuit", &c, "--config", &typo]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("workers[0].qubits"));

    // below the two-qubit minimum is a parameter error
    let tiny = write(
        dir.path(),
        "tiny.json",
        r#"{"workers": [{"name": "a", "qubits": 1}], "epr": {"budget": 0, "success_rate": 0.9}}"#,
    );
    assert_eq!(qcut(&["run", "--circuit", &c, "--config", &tiny]).status.code(), Some(2));

    // two qubits minus one reserved leaves no room for a CX fragment
    let small = write(
        dir.path(),
        "small.json",
        r#"{"workers": [{"name": "a", "qubits": 2}], "epr": {"budget": 0, "success_rate": 0.9}}"#,
    );
    assert_eq!(qcut(&["run", "--circuit", &c, "--config", &small]).status.code(), Some(3));

    // 14 qubits of noisy exact simulation overflows the density-matrix cap
    let mut wide = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[14];\n");
    for q in 0..13 {
        wide += &format!("cx q[{q}],q[{}];\n", q + 1);
    }
    let w = write(dir.path(), "wide.qasm", &wide);
    let big = write(
        dir.path(),
        "big.json",
        r#"{"workers": [{"name": "a", "qubits": 20, "p2": 0.01}], "epr": {"budget": 0, "success_rate": 0.9}}"#,
    );
    assert_eq!(qcut(&["run", "--circuit", &w, "--config", &big]).status.code(), Some(4));
}
