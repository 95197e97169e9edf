use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexassembly"))
        .arg("--scenario")
        .arg(data("scenario_desk.toml"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(p: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(p).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn missing_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_flexassembly"))
        .args(["--scenario", "/nonexistent/scenario.toml", "validate"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scenario.toml"));
}

#[test]
fn validate_prints_pass_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS") || l.starts_with("WARN")), "{text}");
    assert!(text.contains("layout"));
}

#[test]
fn unknown_cost_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["optimize", "--cost", "hinf-everything"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_writes_grid_sized_deterministic_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "analyze",
        "--channel",
        "T_ext{1}:omega_dot_G{1}",
        "--fmin",
        "0.1",
        "--fmax",
        "10",
        "--points",
        "120",
    ];
    assert_eq!(run(a.path(), &args).status.code(), Some(0));
    assert_eq!(run(b.path(), &args).status.code(), Some(0));
    let name = "analyze_open_T_ext_1_omega_dot_G_1";
    let ca = std::fs::read(a.path().join(format!("{name}.csv"))).unwrap();
    let cb = std::fs::read(b.path().join(format!("{name}.csv"))).unwrap();
    assert_eq!(ca, cb);
    let rows = read_csv(&a.path().join(format!("{name}.csv")));
    assert_eq!(rows.len(), 120);
    assert_eq!(rows[0].len(), 5);
    let svg = std::fs::read_to_string(a.path().join(format!("{name}.svg"))).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert!(a.path().join("manifest.json").exists());
}

#[test]
fn analyze_bad_channel_is_a_model_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["analyze", "--channel", "T_ext{1}:nothing{1}", "--points", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nothing"));
}

#[test]
fn optimize_rows_match_grid_and_cap_is_unreachable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["optimize", "--cost", "hinf-isens", "--graph", "pickup", "--n", "2", "--from", "2,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("weighted") && stdout.contains("gap"));

    let log: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("optimize_hinf-isens_trajectory.json")).unwrap())
            .unwrap();
    let hops = |k: &str| log[k]["hops"].as_u64().unwrap() as usize;
    let rows = read_csv(&dir.path().join("optimize_hinf-isens_metrics.csv"));
    // z = 7 waypoints per leg, two legs per edge
    assert_eq!(rows.len(), 14 * (hops("weighted") + hops("unweighted")));

    let graph: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("optimize_hinf-isens_graph.json")).unwrap())
            .unwrap();
    assert_eq!(graph["nodes"].as_array().unwrap().len(), 5);

    let o = run(dir.path(), &["optimize", "--cost", "hinf-isens", "--hard-cap=-200dB", "--n", "2"]);
    assert_eq!(o.status.code(), Some(4));
}
