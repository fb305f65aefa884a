use std::path::Path;
use std::process::{Command, Output};

fn lab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eikonal-lab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn vortex_file_has_one_masked_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["gen-field", "--kind", "vortex", "--n", "256"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let header: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("vortex.json")).unwrap()).unwrap();
    assert_eq!(header["n"], 256);
    let runs = header["mask"].as_array().unwrap();
    let masked: u64 = runs.iter().map(|r| r[1].as_u64().unwrap()).sum();
    assert_eq!(masked, 1);
    let bytes = std::fs::metadata(dir.path().join("vortex.bin")).unwrap().len();
    assert_eq!(bytes, 8 * 256 * 256);
}

#[test]
fn cost_curve_rows_exceed_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["cost-curve", "--samples", "100"]);
    assert!(out.status.success());
    let table = rows(&dir.path().join("cost.csv"));
    assert_eq!(table.len(), 100);
    assert!(table.iter().all(|r| r[1] > r[2]));
    assert!((table[99][0] - 2.0).abs() < 1e-12);
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        for args in [
            &["--n", "128", "production"][..],
            &["--n", "256", "scaling"][..],
            &["kinetic-check", "--beta", "0.6"][..],
            &["cost-curve", "--samples", "50"][..],
        ] {
            let out = lab(dir, args);
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
    for name in ["production.csv", "production.json", "scaling.csv", "kinetic.csv", "kinetic.json", "cost.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty() && x == y, "{name} differs");
    }
}

#[test]
fn field_round_trip_through_production() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("j");
    let out = lab(dir.path(), &["--n", "128", "gen-field", "--kind", "jump", "--beta", "0.5", "--output", stem.to_str().unwrap()]);
    assert!(out.status.success());
    let out = lab(dir.path(), &["production", "--field", stem.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("production.json")).unwrap()).unwrap();
    assert_eq!(summary["field"], "j");
    assert_eq!(summary["n"], 128);
}

#[test]
fn error_classes_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(dir.path(), &["no-such-command"]).status.code(), Some(2));
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"grid_size": 5}"#).unwrap();
    let out = lab(dir.path(), &["--config", cfg.to_str().unwrap(), "cost-curve"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);
    // 2^-7 is one cell at n = 128
    assert_eq!(lab(dir.path(), &["--n", "128", "scaling"]).status.code(), Some(3));
    let missing = dir.path().join("absent");
    assert_eq!(lab(dir.path(), &["besov", "--field", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn kinetic_out_flag_writes_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub").join("sigma.csv");
    let out = lab(dir.path(), &["kinetic-check", "--kinetic-out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&path);
    assert_eq!(table.len(), 4096);
    let mean: f64 = table.iter().map(|r| r[1]).sum::<f64>() / 4096.0;
    assert!(mean.abs() < 1e-12);
}
