use std::process::{Command, Output};

fn polarforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarforge"))
        .args(args)
        .env_remove("POLARFORGE_THREADS")
        .output()
        .expect("spawn polarforge")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn attractor_count_at_16() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.json");
    let o = polarforge(&["attractor", "--n", "16", "--case", "half_pi", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("count: 2584"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["indices"].as_array().unwrap().len(), 2584);
    assert!(dir.path().join("a.json.manifest.json").exists());
}

#[test]
fn attractor_pi_case_halves_count() {
    let o = polarforge(&["attractor", "--n", "10", "--case", "pi"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // MSB 0 and no 11: F_(n+1).
    assert_eq!(v["indices"].as_array().unwrap().len(), 89);
}

#[test]
fn poset_pair_queries() {
    let o = polarforge(&["poset", "--n", "4", "--max-order", "3", "--pair", "6,9"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "LessEq");
    let o = polarforge(&["poset", "--n", "4", "--max-order", "3", "--pair", "0b1001,0b0110"]);
    assert_eq!(stdout(&o).trim(), "GreaterEq");
}

#[test]
fn design_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.json");
    let o = polarforge(&["design", "--n", "6", "--k", "32", "--method", "ga", "--sigma2", "0.5", "-o", d.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("frozen: 32"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&d).unwrap()).unwrap();
    assert_eq!(v["frozen"].as_array().unwrap().len(), 32);
    assert_eq!(v["K"], 32);

    let csv = dir.path().join("sim.csv");
    let run = |threads: &str| {
        let o = polarforge(&[
            "--threads", threads, "simulate", "--design", d.to_str().unwrap(), "--snr", "2", "--max-frames", "8192",
            "--seed", "7", "-o", csv.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        std::fs::read_to_string(&csv).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert!(one.starts_with("snr_db,"));
}

#[test]
fn fastga_reports_pre_frozen() {
    let o = polarforge(&["design", "--n", "8", "--k", "128", "--method", "fastga", "--sigma2", "0.6"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"method\""));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pre_frozen:"));
}

#[test]
fn evolve_csv_has_every_channel() {
    let o = polarforge(&["evolve", "--n", "5", "--sigma2", "1.0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 33);
}

#[test]
fn validate_passes() {
    let o = polarforge(&["validate", "--soundness-depth", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn exit_codes() {
    assert_eq!(polarforge(&["design", "--n", "4", "--k", "20", "--method", "ga", "--sigma2", "1"]).status.code(), Some(1));
    assert_eq!(polarforge(&["design", "--n", "4", "--k", "2", "--method", "nope", "--sigma2", "1"]).status.code(), Some(1));
    assert_eq!(polarforge(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(polarforge(&["--help"]).status.code(), Some(0));
    assert_eq!(polarforge(&["simulate", "--design", "/nonexistent/d.json", "--snr", "1"]).status.code(), Some(3));
}
