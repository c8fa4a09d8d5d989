use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spanner(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spanner"))
        .args(args)
        .current_dir(dir)
        .env_remove("SPANNER_THREADS")
        .output()
        .expect("spawn spanner")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = spanner(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["build", "expander", "shadow", "attack", "certify", "loss-curve", "lso"] {
        assert!(text.contains(cmd), "{cmd} missing from usage");
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(spanner(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(spanner(&["build", "1d-const", "--seed", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(spanner(&["build", "1d-theta", "--n", "10", "--theta", "3", "--seed", "1"], dir.path()).status.code(), Some(2));
}

#[test]
fn build_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    ok(&spanner(&["build", "1d-const", "--n", "16", "--seed", "7", "-o", "a.txt"], dir.path()));
    ok(&spanner(&["build", "1d-const", "--n", "16", "--seed", "7", "-o", "b.txt"], dir.path()));
    let a = fs::read(dir.path().join("a.txt")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.txt")).unwrap());
    assert!(String::from_utf8(a).unwrap().starts_with("# n 16\n"));
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.txt.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["n"], 16);
    assert_eq!(m["config"]["xi"], 0.0625);
    assert_eq!(m["seeds"]["seed"], 7);
    assert_eq!(m["construction"]["kind"], "1d-const");
    let c = spanner(&["build", "1d-const", "--n", "16", "--seed", "7"], dir.path());
    ok(&c);
    assert_eq!(c.stdout, fs::read(dir.path().join("a.txt")).unwrap());
}

#[test]
fn threads_env_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_spanner"))
        .args(["build", "1d-const", "--n", "8", "--seed", "1", "-o", "g.txt"])
        .current_dir(dir.path())
        .env("SPANNER_THREADS", "3")
        .output()
        .unwrap();
    ok(&out);
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("g.txt.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["threads"], 3);
}

#[test]
fn h_pipeline_build_attack_certify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&spanner(&["build", "1d-const", "--n", "1024", "--seed", "3", "-o", "h.txt"], d));
    ok(&spanner(
        &["attack", "--graph", "h.txt", "--meta", "h.txt.manifest.json", "--kind", "random-k", "--k", "32", "--seed", "5", "-o", "bad.txt"],
        d,
    ));
    assert_eq!(fs::read_to_string(d.join("bad.txt")).unwrap().lines().count(), 32);
    let out = spanner(
        &["certify", "--graph", "h.txt", "--meta", "h.txt.manifest.json", "--bad", "bad.txt", "-o", "report.json"],
        d,
    );
    ok(&out);
    let r: Value = serde_json::from_str(&fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["report_version"], 1);
    assert_eq!(r["pass"], true);
    assert_eq!(r["failing_outside"], 0);
    assert!(r["harmed_size"].as_u64().unwrap() <= 200 * 32);
    assert_eq!(r["attack"]["kind"], "random-k");
}

#[test]
fn certification_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&spanner(&["build", "1d-const", "--n", "1024", "--seed", "1", "-o", "h.txt"], d));
    // A path graph loses every crossing pair once a middle vertex fails.
    let mut path = String::from("# n 1024\n");
    for i in 0..1023 {
        path.push_str(&format!("{} {} 1\n", i, i + 1));
    }
    fs::write(d.join("path.txt"), path).unwrap();
    fs::write(d.join("bad.txt"), "500\n").unwrap();
    let out = spanner(&["certify", "--graph", "path.txt", "--meta", "h.txt.manifest.json", "--bad", "bad.txt"], d);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["pass"], false);
}

#[test]
fn euclidean_pipeline_and_loss_curve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let pts: String = (0..64).map(|i| format!("{} {}\n", (i % 8) as f64 + 0.01 * (i / 8) as f64, (i / 8) as f64)).collect();
    fs::write(d.join("pts.txt"), pts).unwrap();
    ok(&spanner(
        &["build", "bounded-spread", "--points", "pts.txt", "--eps", "0.5", "--theta", "0.25", "--constant", "2", "--seed", "4", "-o", "g.txt"],
        d,
    ));
    ok(&spanner(
        &["loss-curve", "--graph", "g.txt", "--meta", "g.txt.manifest.json", "--kind", "ball", "--ks", "0,4,8", "--trials", "3", "--seed", "2", "-o", "curve.csv"],
        d,
    ));
    let csv = fs::read_to_string(d.join("curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,3,0.000000,0.000000,0.000000,0,"));
    ok(&spanner(
        &["build", "hd", "--points", "pts.txt", "--eps", "0.5", "--theta", "0.5", "--mode", "experimental", "--c", "8", "--seed", "4", "-o", "hd.txt"],
        d,
    ));
    ok(&spanner(&["attack", "--graph", "hd.txt", "--meta", "hd.txt.manifest.json", "--kind", "random-k", "--k", "4", "--seed", "1", "-o", "b.txt"], d));
    ok(&spanner(&["certify", "--graph", "hd.txt", "--meta", "hd.txt.manifest.json", "--bad", "b.txt", "-o", "r.json"], d));
}

#[test]
fn expander_and_shadow_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&spanner(&["expander", "bipartite", "--left", "8", "--right", "8", "--xi", "0.25", "--seed", "1", "--verify", "exhaustive", "-o", "e.txt"], d));
    let m: Value = serde_json::from_str(&fs::read_to_string(d.join("e.txt.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["details"]["result"]["pass"], true);
    ok(&spanner(&["expander", "strong", "--n", "12", "--alpha", "2", "--beta", "0.5", "--seed", "1", "--verify", "exhaustive"], d));
    ok(&spanner(&["expander", "reliable", "--n", "40", "--theta", "0.4", "--seed", "1", "--verify", "sampled:50"], d));
    assert_eq!(spanner(&["expander", "strong", "--n", "12", "--alpha", "2", "--beta", "0.5", "--seed", "1", "--verify", "sometimes"], d).status.code(), Some(2));

    fs::write(d.join("bad.txt"), "3\n4\n").unwrap();
    let out = spanner(&["shadow", "1d", "--n", "10", "--alpha", "1/2", "--bad", "bad.txt"], d);
    ok(&out);
    let s: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(s["members"], serde_json::json!([1, 2, 3, 4, 5, 6]));
    assert!(s["bound_checks"]["general"]["holds"].as_bool().unwrap());

    let pts: String = (0..20).map(|i| format!("{} {}\n", i % 5, i / 5)).collect();
    fs::write(d.join("pts.txt"), pts).unwrap();
    for cmd in ["quadtree", "balls", "cones"] {
        let out = spanner(&["shadow", cmd, "--points", "pts.txt", "--alpha", "0.5", "--bad", "bad.txt"], d);
        ok(&out);
        let s: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(s["members"].as_array().unwrap().len() >= 2, "{cmd}");
    }
}

#[test]
fn lso_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = spanner(&["lso", "inspect", "--d", "2", "--sigma", "0.25", "--id", "5"], d);
    ok(&out);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["family"]["m"], 7681);
    assert_eq!(v["ordering"]["id"], 5);
    let out = spanner(&["lso", "check", "--d", "2", "--sigma", "0.25", "--pairs", "200", "--seed", "1"], d);
    ok(&out);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["rate"].as_f64().unwrap() >= 0.99);
}
