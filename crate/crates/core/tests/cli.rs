use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use equipart::iterated::PartitionTree;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_equipart"));
    c.env_remove("EQUIPART_LOG");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "square.json", r#"{"vertices":[[0,0],[1,0],[1,1],[0,1]]}"#);
    write(dir.path(), "sites.json", r#"{"sites":[[0.25,0.5],[0.5,0.5]]}"#);
    write(dir.path(), "grid.json", r#"{"kind":"grid","origin":[0,0],"cell_size":0.5,"values":[[1,1],[3,3]]}"#);
    dir
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn weights_closed_form() {
    let dir = setup();
    let out = run(dir.path(), &["weights", "--body", "square.json", "--sites", "sites.json", "--out", "w.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let w = json(&dir.path().join("w.json"));
    let w: Vec<f64> = serde_json::from_value(w["w"].clone()).unwrap();
    assert!((w[0] - 0.03125).abs() < 1e-6 && (w[1] + 0.03125).abs() < 1e-6, "{w:?}");
}

#[test]
fn weights_with_density_lambda_and_stdout() {
    let dir = setup();
    let out = run(
        dir.path(),
        &["weights", "--body", "square.json", "--density", "grid.json", "--sites", "sites.json", "--lambda", "0.3,0.7"],
    );
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["w"].as_array().unwrap().len(), 2);
}

#[test]
fn weights_budget_exhausted_exits_two() {
    let dir = setup();
    write(dir.path(), "three.json", "[[0.1,0.1],[0.9,0.2],[0.5,0.95]]");
    let out = run(dir.path(), &["weights", "--body", "square.json", "--sites", "three.json", "--max-iter", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_inputs_exit_one() {
    let dir = setup();
    write(dir.path(), "bad.json", "{not json");
    write(dir.path(), "cw.json", r#"{"vertices":[[0,0],[0,1],[1,0]]}"#);
    for args in [
        vec!["weights", "--body", "bad.json", "--sites", "sites.json"],
        vec!["weights", "--body", "cw.json", "--sites", "sites.json"],
        vec!["weights", "--body", "missing.json", "--sites", "sites.json"],
        vec!["weights", "--body", "square.json", "--sites", "sites.json", "--lambda", "0.5,0.6"],
        vec!["weights", "--body", "square.json", "--sites", "sites.json", "--tol", "-1"],
        vec!["obstruction", "--type", "2,x"],
        vec!["obstruction", "--type", "2", "--d", "1"],
        vec!["solve", "--type", "2", "--body", "square.json", "--jobs", "0"],
    ] {
        let out = run(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn refuses_to_overwrite_input() {
    let dir = setup();
    let before = std::fs::read_to_string(dir.path().join("sites.json")).unwrap();
    let out = run(dir.path(), &["weights", "--body", "square.json", "--sites", "sites.json", "--out", "sites.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(std::fs::read_to_string(dir.path().join("sites.json")).unwrap(), before);
}

#[test]
fn solve_then_partition_round_trip() {
    let dir = setup();
    let out = run(
        dir.path(),
        &[
            "solve",
            "--type",
            "2,2",
            "--body",
            "square.json",
            "--seed",
            "42",
            "--tol",
            "1e-4",
            "--out",
            "report.json",
            "--svg",
            "solve.svg",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["success"], true);
    assert_eq!(report["obstruction"]["exists_map"], false);
    assert!(report["perimeter_spread"].as_f64().unwrap() <= 1e-4);
    let svg = std::fs::read_to_string(dir.path().join("solve.svg")).unwrap();
    assert_eq!(svg.matches("<path").count(), 4);

    let out = run(
        dir.path(),
        &[
            "partition",
            "--type",
            "2,2",
            "--body",
            "square.json",
            "--tree",
            "report.json",
            "--tol",
            "1e-12",
            "--out",
            "part.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let part: PartitionTree = serde_json::from_value(json(&dir.path().join("part.json"))).unwrap();
    let best: PartitionTree = serde_json::from_value(report["best_partition"].clone()).unwrap();
    for (a, b) in part.leaves().iter().zip(best.leaves()) {
        assert!(equipart::geometry::hausdorff_distance(a, b) < 1e-8);
    }

    let out = run(dir.path(), &["partition", "--type", "2,3", "--body", "square.json", "--tree", "report.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_is_reproducible() {
    let dir = setup();
    let args = ["solve", "--type", "2", "--body", "square.json", "--seed", "7", "--restarts", "2"];
    let a = run(dir.path(), &args);
    let b = run(dir.path(), &[&args[..], &["--jobs", "2"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn solve_unmet_tolerance_exits_two() {
    let dir = setup();
    let out = run(
        dir.path(),
        &["solve", "--type", "2,2", "--body", "square.json", "--restarts", "1", "--budget", "5", "--tol", "1e-14"],
    );
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["success"], false);
}

#[test]
fn obstruction_outputs() {
    let dir = setup();
    let out = run(dir.path(), &["obstruction", "--type", "2,2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v, serde_json::json!({"exists_map": false, "gcd": 2, "prime": 2, "bezout": null}));

    let out = run(dir.path(), &["obstruction", "--type", "2,3", "--d", "3", "--out", "o.json"]);
    assert!(out.status.success());
    let v = json(&dir.path().join("o.json"));
    assert_eq!(v["exists_map"], true);
    let terms = v["bezout"].as_array().unwrap();
    let sum: i128 = terms
        .iter()
        .map(|t| {
            t["coefficient"].as_str().unwrap().parse::<i128>().unwrap()
                * t["binomial"].as_str().unwrap().parse::<i128>().unwrap()
        })
        .sum();
    assert_eq!(sum, 1);
}

#[test]
fn poset_dot() {
    let dir = setup();
    let out = run(dir.path(), &["poset", "--type", "2,3", "--out", "p.dot"]);
    assert!(out.status.success());
    let dot = std::fs::read_to_string(dir.path().join("p.dot")).unwrap();
    assert!(dot.starts_with("digraph poset {"));
    assert_eq!(dot.matches("->").count(), 3 + 6);
}

#[test]
fn log_levels() {
    let dir = setup();
    let args = ["obstruction", "--type", "3"];
    for level in ["quiet", "info", "debug"] {
        let out = bin().current_dir(dir.path()).args(args).env("EQUIPART_LOG", level).output().unwrap();
        assert!(out.status.success(), "{level}");
    }
    let out = bin().current_dir(dir.path()).args(args).env("EQUIPART_LOG", "loud").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_and_version() {
    for flag in ["--help", "--version"] {
        let out = bin().arg(flag).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        assert!(!out.stdout.is_empty());
    }
}
