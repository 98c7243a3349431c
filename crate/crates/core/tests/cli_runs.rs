use std::fs;
use std::path::Path;
use std::process::Command;

fn run(config: &str, dir: &Path, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_chaos-stein"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

#[test]
fn breuer_major_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(r#"{"command":"breuer-major","H":[0.5,0.7],"q":2,"ns":[2,8,32]}"#, dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(dir.path().join("out/breuer_major.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "H,q,n,variance_term,squared_total,kol_bound,rate_exponent,regime,predicted"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[2], "2");
    assert!((first[5].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(csv.lines().count(), 7);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "breuer-major");
    assert_eq!(manifest["outputs"][0], "breuer_major.csv");
    assert!(manifest["timings"]["total_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn repeated_runs_are_byte_identical_across_thread_counts() {
    let cfg = r#"{"command":"simulate","H":0.6,"q":2,"n":16,"count":4000,"seed":3,"write_samples":true}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(cfg, a.path(), &["--threads", "1"]).0, 0);
    assert_eq!(run(cfg, b.path(), &["--threads", "3"]).0, 0);
    for name in ["samples.csv", "simulate_summary.csv"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    // the flag overrides the config seed
    let c = tempfile::tempdir().unwrap();
    assert_eq!(run(cfg, c.path(), &["--seed", "4"]).0, 0);
    assert_ne!(
        fs::read(a.path().join("out/samples.csv")).unwrap(),
        fs::read(c.path().join("out/samples.csv")).unwrap()
    );
}

#[test]
fn kernel_file_and_gamma_command() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("k.json"),
        r#"{"dim":2,"order":2,"entries":[[[0,0],1.0]]}"#,
    )
    .unwrap();
    let (code, err) = run(r#"{"command":"gamma","kernel":"k.json","q":2,"nu":1,"metrics":["h1","h2"]}"#, dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(dir.path().join("out/gamma.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    for line in csv.lines().skip(1) {
        let bound: f64 = line.split(',').nth(8).unwrap().parse().unwrap();
        assert!(bound.abs() < 1e-12, "{line}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run("{not json", dir.path(), &[]);
    assert_eq!(code, 3);
    assert!(!dir.path().join("out").exists());

    let (code, _) = run(r#"{"command":"breuer-major","H":0.8,"q":2,"ns":[4]}"#, dir.path(), &[]);
    assert_eq!(code, 4);

    let (code, _) = run(r#"{"command":"bound","kernel":"missing.json"}"#, dir.path(), &[]);
    assert_eq!(code, 5);

    let (code, _) = run(
        r#"{"command":"breuer-major","H":0.6,"q":3,"ns":[64],"method":"naive","operation_budget":10}"#,
        dir.path(),
        &[],
    );
    assert_eq!(code, 6);
}
