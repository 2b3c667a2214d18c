use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toric-pulse")).args(args).output().expect("run binary")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("toric-pulse-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn describe_code_reports_the_lattice() {
    let v = json(&bin(&["describe-code", "--L", "3"]));
    assert_eq!(v["n_qubits"], 13);
    assert_eq!(v["quarters"].as_array().unwrap().len(), 4);
    assert_eq!(v["stabilizers"].as_array().unwrap().len(), 12);
}

#[test]
fn emit_sequence_and_hamiltonian() {
    let v = json(&bin(&["emit-sequence", "--L", "2"]));
    assert_eq!(v["segments"].as_array().unwrap().len(), 32);
    let v = json(&bin(&["emit-sequence", "--L", "3", "--kind", "prep"]));
    assert_eq!(v.as_array().unwrap().len(), 2);
    let v = json(&bin(&["emit-hamiltonian", "--L", "2"]));
    assert!(!v["zeroth_order"].as_array().unwrap().is_empty());
    assert!(!v["second_order"].as_array().unwrap().is_empty());
    let v = json(&bin(&["emit-hamiltonian", "--L", "2", "--delta", "0"]));
    assert!(v["second_order"].as_array().unwrap().is_empty());
}

#[test]
fn t_opt_matches_the_closed_form() {
    let v = json(&bin(&["t-opt", "--sigma-theta", "1e-3"]));
    let t = v["t_opt"].as_f64().unwrap();
    assert!((0.08..=0.12).contains(&t));
    assert!((v["fidelity"].as_f64().unwrap() - 0.91).abs() < 0.02);
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        &["t-opt", "--delta", "0", "--sigma-theta", "1e-3"][..],
        &["t-opt", "--alpha", "2.5"],
        &["describe-code", "--L", "1"],
        &["error-sweep", "--L", "2", "--t-max", "0.1", "--T", "0.3"],
        &["emit-sequence", "--kind", "quarter", "--quarter", "7"],
        &["scaling-report", "--l-min", "9", "--l-max", "4"],
        &["prep-fidelity", "--samples", "0"],
    ] {
        let out = bin(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn config_file_with_flag_override() {
    let cfg = scratch("config.json");
    std::fs::write(
        &cfg,
        r#"{"L": 2, "delta": 0.05, "sigma_theta": 1e-3, "experiment": {"samples": 2, "seed": 4, "t_max": 0.5, "points": 2, "probes": 1}}"#,
    )
    .unwrap();
    let out = bin(&["error-sweep", "--config", cfg.to_str().unwrap(), "--seed", "6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.ends_with(",6,2,stochastic_trace")), "{text}");
    std::fs::write(&cfg, r#"{"L": "three"}"#).unwrap();
    assert_eq!(bin(&["t-opt", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn csv_output_is_deterministic() {
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    for path in [&a, &b] {
        let out = bin(&[
            "error-sweep", "--L", "2", "--vary", "sigma", "--sigmas", "0,1e-3,1e-2", "--t-max", "0.25", "--samples",
            "3", "--seed", "17", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("series,variable,value,fidelity,std_error,model,seed,samples,method\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn fidelity_curve_and_prep_fidelity_write_csv() {
    let out = bin(&["fidelity-curve", "--L", "2", "--fock", "2", "--t-max", "1", "--points", "2", "--method", "exact-dense"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for series in ["zeroth_order", "second_order", "f2"] {
        assert_eq!(text.lines().filter(|l| l.starts_with(series)).count(), 2, "{text}");
    }
    let out = bin(&["prep-fidelity", "--L", "2", "--samples", "5", "--sigmas", "1e-2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fitted k"));
}

#[test]
fn constraints_and_scaling() {
    let v = json(&bin(&["check-constraints", "--T", "0.1", "--t1", "0.5"]));
    let t1 = v.as_array().unwrap().iter().find(|c| c["name"] == "T << T1").unwrap();
    assert_eq!(t1["status"], "fail");
    let v = json(&bin(&["scaling-report", "--sigma-theta", "1e-3", "--l-min", "3", "--l-max", "10"]));
    assert_eq!(v["ls"].as_array().unwrap().len(), 8);
}
