use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairspread"))
}

#[test]
fn fixture_checks_pass() {
    for name in ["star", "two_node", "bipartite_blowup", "pof"] {
        let out = bin().args(["fixture", name, "--check"]).output().unwrap();
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(out.status.success(), "{name}: {stdout}");
        assert!(!stdout.contains("FAIL"), "{stdout}");
    }
}

#[test]
fn unknown_fixture_fails() {
    let out = bin().args(["fixture", "nope"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown fixture"));
}

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        "instance = \"star\"\nalgorithms = [\"grdy_im\", \"grdy_grp+lp\"]\nexact = true\ngraphs = 1\nrepetitions = 2\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let json = dir.path().join("out.json");
    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--csv")
        .arg(&csv)
        .arg("--json")
        .arg(&json)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("algorithm,eta,rep,coverage_ratio,violation_additive,violation_multiplicative,runtime_s,seed"));
    assert!(text.contains("grdy_grp+lp,0,mean"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["records"].as_array().unwrap().len(), 4);
}

#[test]
fn eval_distribution_on_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let graph: String = (0..6).flat_map(|v| [format!("u1 v{v} 1\n"), format!("u2 v{v} 1\n")]).collect();
    fs::write(dir.path().join("g.txt"), graph).unwrap();
    let communities: String = ["u1", "u2", "v0", "v1", "v2", "v3", "v4", "v5"]
        .iter()
        .map(|v| format!("{v} {v}\n"))
        .collect();
    fs::write(dir.path().join("c.txt"), communities).unwrap();
    // Ids follow first appearance: u1 = 0, v0 = 1, u2 = 2.
    fs::write(
        dir.path().join("p.json"),
        r#"{"kind":"distribution","budget":2,"support":[{"set":[0,2],"weight":0.5},{"set":[],"weight":0.5}]}"#,
    )
    .unwrap();
    let out = bin()
        .current_dir(dir.path())
        .args(["eval", "--graph", "g.txt", "--communities", "c.txt", "--solution", "p.json", "--directed"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["coverage"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!(v["violation_additive"].as_f64().unwrap().abs() < 1e-12);
}
