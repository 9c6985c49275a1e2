mod common;

use std::path::Path;
use std::process::{Command, Output};

use algdomain::domain::Scene;
use algdomain::{Box2, Point, Poly2};
use serde_json::Value;
use tempfile::TempDir;

use common::*;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algdomain")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn scene_file(dir: &TempDir, scene: &Scene) -> String {
    write_json(dir.path(), "scene.json", &scene.to_json()).to_string_lossy().into_owned()
}

fn out_dir(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

#[test]
fn analyze_disk() {
    let dir = TempDir::new().unwrap();
    let scene = scene_file(&dir, &unit_disk());
    let out = out_dir(&dir, "out");
    let o = run(&["analyze", &scene, "-o", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(stdout_json(&o)["morse"], true);
    let report = read_json(&Path::new(&out).join("report.json"));
    assert_eq!(report["poles_x"].as_array().unwrap().len(), 2);
    assert_eq!(report["poles_y"].as_array().unwrap().len(), 2);
    for axis in ["x", "y"] {
        assert_eq!(report["graphs"][axis]["betti1"], 0);
        assert_eq!(report["graphs"][axis]["edges"].as_array().unwrap().len(), 1);
    }
    for f in ["reeb_x.json", "reeb_y.json", "reeb_x.dot", "reeb_y.dot", "domain.svg"] {
        assert!(Path::new(&out).join(f).exists(), "{f} missing");
    }
}

#[test]
fn analyze_annulus_single_axis() {
    let dir = TempDir::new().unwrap();
    let scene = scene_file(&dir, &annulus());
    let out = out_dir(&dir, "out");
    let o = run(&["analyze", &scene, "-o", &out, "--axis", "x"]);
    assert!(o.status.success());
    let report = read_json(&Path::new(&out).join("report.json"));
    assert_eq!(report["graphs"]["x"]["betti1"], 1);
    assert!(report["graphs"].get("y").is_none());
    assert!(!Path::new(&out).join("reeb_y.json").exists());
}

#[test]
fn triple_point_is_invalid_input() {
    let dir = TempDir::new().unwrap();
    let scene = scene_file(&dir, &triple_point());
    let o = run(&["analyze", &scene, "-o", &out_dir(&dir, "out")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout_json(&o)["error"], "TriplePoint");
}

#[test]
fn malformed_scene() {
    let dir = TempDir::new().unwrap();
    let path = write_json(dir.path(), "bad.json", "{\"curves\": []}");
    let o = run(&["analyze", path.to_str().unwrap(), "-o", &out_dir(&dir, "out")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn surgery_on_non_morse_scene_fails() {
    // The line meets the circle at (1, 0), where the circle's tangent is vertical.
    let scene = Scene::new(
        vec![Poly2::circle(origin(), 1.0), Poly2::from_terms([(0, 1, 1.0), (1, 0, -1.0), (0, 0, 1.0)])],
        Box2::centered(1.5),
        Point::new(0.0, 0.5),
    );
    let dir = TempDir::new().unwrap();
    let path = scene_file(&dir, &scene);
    let o = run(&["surgery", &path, "--mode", "ncv", "-o", &out_dir(&dir, "out")]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(stdout_json(&o)["error"], "HypothesisViolated");
}

#[test]
fn surgery_nip_writes_a_stable_scene() {
    let dir = TempDir::new().unwrap();
    let scene = scene_file(&dir, &cubic());
    let out = out_dir(&dir, "out");
    let o = run(&["surgery", &scene, "--mode", "nip", "-o", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let summary = stdout_json(&o);
    assert_eq!(summary["flags_after"]["nip"], true);
    assert_eq!(summary["graph_preserved"], serde_json::json!([true, true]));
    let text = std::fs::read_to_string(Path::new(&out).join("scene_prime.json")).unwrap();
    let parsed = Scene::from_json(&text).unwrap();
    assert_eq!(parsed.to_json() + "\n", text);
    for f in ["surgery_log.json", "before.svg", "after.svg"] {
        assert!(Path::new(&out).join(f).exists(), "{f} missing");
    }
}

#[test]
fn svg_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let scene = scene_file(&dir, &annulus());
    let (a, b) = (out_dir(&dir, "a"), out_dir(&dir, "b"));
    assert!(run(&["analyze", &scene, "-o", &a]).status.success());
    assert!(run(&["analyze", &scene, "-o", &b]).status.success());
    for f in ["domain.svg", "report.json", "reeb_x.dot"] {
        let x = std::fs::read(Path::new(&a).join(f)).unwrap();
        let y = std::fs::read(Path::new(&b).join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
}

#[test]
fn realize_path() {
    let dir = TempDir::new().unwrap();
    let graph = write_json(dir.path(), "graph.json", &path_graph().to_json());
    let out = out_dir(&dir, "out");
    let o = run(&["realize", graph.to_str().unwrap(), "-o", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let summary = stdout_json(&o);
    assert_eq!(summary["matched"], true);
    assert_eq!(summary["morse"], true);
    let scene = std::fs::read_to_string(Path::new(&out).join("scene.json")).unwrap();
    assert!(Scene::from_json(&scene).is_ok());
    assert!(Path::new(&out).join("realized.svg").exists());
}

#[test]
fn check_disk() {
    let dir = TempDir::new().unwrap();
    let scene = scene_file(&dir, &unit_disk());
    let out = out_dir(&dir, "out");
    let o = run(&["check", &scene, "-o", &out, "--resolution", "512"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let report = stdout_json(&o);
    assert!(report["mismatches"].as_array().unwrap().is_empty());
    assert!(Path::new(&out).join("check.json").exists());
}
