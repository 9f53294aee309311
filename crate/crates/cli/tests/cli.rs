use std::path::Path;
use std::process::{Command, Output};

fn qrev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrev")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let o = qrev(args);
    assert!(
        o.status.success(),
        "qrev {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn csv_field(dir: &Path, column: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(dir.join("report.csv")).unwrap();
    let i = r.headers().unwrap().iter().position(|h| h == column).unwrap();
    r.records().map(|rec| rec.unwrap()[i].to_string()).collect()
}

#[test]
fn evaluate_reports_six_params_for_two_qubit_xyz() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "evaluate",
        "--set",
        "seed=1",
        "--set",
        "recovery.methods=['ae','brute']",
        "--set",
        "recovery.grid_step=0.5",
        "--set",
        "recovery.bf_step=0.5",
        "--set",
        "ae.epochs=2",
        "--set",
        "ae.batch_size=256",
        "--set",
        "qnn.epochs=3",
        "--set",
        "qnn.retrain_epochs=2",
        "--out",
        out,
    ]);
    assert_eq!(csv_field(dir.path(), "method"), vec!["autoencoder", "brute_force"]);
    assert_eq!(csv_field(dir.path(), "n_params"), vec!["6", "6"]);
    assert_eq!(csv_field(dir.path(), "structure_exact"), vec!["true", "true"]);
    let hash = csv_field(dir.path(), "config_hash").remove(0);
    for f in [
        "config.resolved",
        "artifacts/victim.txt",
        "artifacts/params_brute_force.txt",
        "artifacts/model_rx-ry-rz.txt",
    ] {
        let text = String::from_utf8(read(&dir.path().join(f))).unwrap();
        assert!(text.starts_with(&format!("# config_hash={hash} seed=1\n")), "{f}");
    }
    let json: serde_json::Value = serde_json::from_slice(&read(&dir.path().join("report.json"))).unwrap();
    assert_eq!(json["reports"][0]["n_params"], 6);
    assert!(json["reports"][0].get("timings").is_none());
}

#[test]
fn unknown_signature_exits_with_recovery_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["train-qnn", "--set", "seed=2", "--set", "qnn.epochs=1", "--out", out]);
    ok(&["transpile", "--set", "seed=2", "--out", out]);
    ok(&["build-lut", "--set", "seed=2", "--templates", "ry", "--out", out]);
    let o = qrev(&["recover-structure", "--set", "seed=2", "--out", out]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn step_by_step_pipeline_matches_structure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let common = ["--set", "seed=4", "--set", "ansatz.rotations=ry", "--set", "qnn.epochs=2", "--out", out];
    for cmd in ["train-qnn", "transpile", "build-lut", "recover-structure", "gen-ae-dataset"] {
        let mut args = vec![cmd];
        args.extend(common);
        ok(&args);
    }
    let mut args = vec!["train-ae", "--set", "ae.epochs=2", "--set", "ae.batch_size=16"];
    args.extend(common);
    ok(&args);
    for m in ["ae", "brute"] {
        let mut args = vec!["recover-params", "--method", m];
        args.extend(common);
        ok(&args);
    }
    let a = dir.path().join("artifacts");
    let original = qrev::qnn::params_from_text(&String::from_utf8(read(&a.join("params.txt"))).unwrap()).unwrap();
    let bf = qrev::qnn::params_from_text(&String::from_utf8(read(&a.join("params_brute_force.txt"))).unwrap()).unwrap();
    let ae = qrev::qnn::params_from_text(&String::from_utf8(read(&a.join("params_autoencoder.txt"))).unwrap()).unwrap();
    assert_eq!(original.len(), 2);
    assert_eq!(bf.len(), 2);
    assert_eq!(ae.len(), 2);
    let model = qrev::recovery::RecoveryModel::load(&a.join("model_ry.txt")).unwrap();
    assert_eq!(model.template, vec![qrev::GateKind::Ry]);
}

#[test]
fn same_seed_gives_identical_outputs() {
    let run = |dir: &Path| {
        ok(&[
            "evaluate",
            "--set",
            "seed=9",
            "--set",
            "ansatz.rotations=ry",
            "--set",
            "recovery.methods=['ae','brute']",
            "--set",
            "ae.epochs=3",
            "--set",
            "ae.batch_size=16",
            "--set",
            "qnn.epochs=3",
            "--out",
            dir.to_str().unwrap(),
        ]);
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(a.path());
    run(b.path());
    let mut files = vec!["config.resolved".to_string(), "report.csv".into(), "report.json".into()];
    for e in std::fs::read_dir(a.path().join("artifacts")).unwrap() {
        files.push(format!("artifacts/{}", e.unwrap().file_name().to_string_lossy()));
    }
    assert!(files.len() > 6);
    for f in files {
        assert_eq!(read(&a.path().join(&f)), read(&b.path().join(&f)), "{f}");
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 1\n[ansatz]\nn_qbits = 2\n").unwrap();
    let o = qrev(&["evaluate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_qbits"));

    let o = qrev(&["evaluate", "--set", "seed=1", "--set", "transpile.optimization_level=7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("transpile.optimization_level"));
}

#[test]
fn report_merges_and_refuses_conflicts() {
    let root = tempfile::tempdir().unwrap();
    let run = |name: &str, level: &str| {
        let out = root.path().join(name);
        ok(&[
            "evaluate",
            "--set",
            "seed=1",
            "--set",
            "ansatz.rotations=ry",
            "--set",
            "recovery.methods=['brute']",
            "--set",
            "qnn.epochs=1",
            "--set",
            &format!("transpile.optimization_level={level}"),
            "--out",
            out.to_str().unwrap(),
        ]);
        out
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "0");
    let merged = root.path().join("merged");
    ok(&["report", "--out", merged.to_str().unwrap(), a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(csv_field(&merged, "method").len(), 2);
    let o = qrev(&["report", "--out", merged.to_str().unwrap(), a.to_str().unwrap(), c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_countermeasures_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "bench-countermeasures",
        "--set",
        "seed=3",
        "--set",
        "ansatz.rotations=ry",
        "--set",
        "recovery.methods=['brute']",
        "--set",
        "qnn.epochs=1",
        "--set",
        "countermeasures.dummy_qubits=[0,1]",
        "--set",
        "countermeasures.extra_layers=[0]",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(csv_field(dir.path(), "dummy_qubits"), vec!["0", "1"]);
    let gates: Vec<usize> = csv_field(dir.path(), "transpiled_gates").iter().map(|g| g.parse().unwrap()).collect();
    assert!(gates[1] > gates[0]);
}
