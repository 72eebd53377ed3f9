use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, map: &str, args: &[&str]) -> Output {
    let map_path = dir.join("map.toml");
    fs::write(&map_path, map).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hofbauer"))
        .arg("--map")
        .arg(&map_path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

const GOLDEN: &str = "family=\"beta\"\nbeta=\"golden\"\n";
const DOUBLING: &str = "family=\"beta\"\nbeta=\"2\"\n";

#[test]
fn golden_entropy_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), GOLDEN, &["entropy", "--depths", "4,8,12"]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("out/entropy.csv")).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 3);
    assert!(values.windows(2).all(|p| p[0] <= p[1]));
    let target = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    assert!(values.iter().all(|v| (v - target).abs() < 1e-9));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), csv);
}

#[test]
fn doubling_certificate_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), DOUBLING, &["prop31", "--phi", "x", "--epsilon", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/certificate.json")).unwrap()).unwrap();
    assert_eq!(doc["gap"], 0);
    assert_eq!(doc["verification"]["passed"], true);
    assert!(doc["separation"].as_f64().unwrap() > 0.0);
    assert!((doc["entropy_lb"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), DOUBLING, &["prop31", "--phi", "const:1/2"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), DOUBLING, &["entropy", "--n", "20", "--budget", "100"]).status.code(), Some(4));
    let bad = run(dir.path(), "family=\"beta\"\nbeta = = 2\n", &["diagram"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8(bad.stderr).unwrap().contains("line 2"));
    let irrational = run(dir.path(), GOLDEN, &["--mode", "exact", "diagram"]);
    assert_eq!(irrational.status.code(), Some(1));
}

#[test]
fn artifacts_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(run(dir.path(), GOLDEN, &["diagram", "--depth", "6"]).status.success());
        assert!(run(dir.path(), DOUBLING, &["irregular", "--u", "112", "--v", "12", "--horizon", "5000"]).status.success());
        assert!(run(dir.path(), GOLDEN, &["prop31", "--phi", "indicator:2"]).status.success());
    }
    for name in ["diagram.dot", "vertices.csv", "edges.csv", "checkpoints.csv", "blocks.csv", "stream.txt", "certificate.json"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn periodic_and_spread() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), DOUBLING, &["periodic", "--max-period", "3"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("112,3,1/7,1/7 2/7 4/7,false,1/3"));
    let out = run(dir.path(), GOLDEN, &["spread", "--phi", "indicator:2", "--max-period", "4"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().next(), Some("0 0.5"));
}

#[test]
fn decompose_two_invariant_halves() {
    let dir = tempfile::tempdir().unwrap();
    // two tent-like pieces, each mapping its half onto itself
    let map = "family=\"affine_pieces\"\nendpoints=\"0,1/4,1/2,3/4,1\"\nslopes=\"2,-2,2,-2\"\nintercepts=\"0,1,-1/2,5/2\"\n";
    let out = run(dir.path(), map, &["decompose", "--components", "0:1/2,1/2:1", "--depth", "6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("irregular_entropy 0.693147180559945"), "{text}");
}
