//! End-to-end paths through the public API: configuration file, field files,
//! production and the kinetic measure of the same jump.

use eikonal_lab::circlegeom::TrigPolynomial;
use eikonal_lab::entropy::{build_entropy, jump_pairing, JumpConfig};
use eikonal_lab::fields::make_jump_field;
use eikonal_lab::io;
use eikonal_lab::kinetic::sigma_jump;
use eikonal_lab::production::entropy_production_in;
use eikonal_lab::ExperimentConfig;

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let cfg = ExperimentConfig {
        n: 256,
        seed: 9,
        ..Default::default()
    };
    std::fs::write(&path, cfg.to_json()).unwrap();
    assert_eq!(ExperimentConfig::load(&path).unwrap(), cfg);
}

#[test]
fn stored_field_reproduces_jump_production() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("jump");
    let jump = JumpConfig::symmetric(0.9).rotated(0.4);
    let n = 192;
    let f = make_jump_field(&jump, [0.5, 0.5], n, 1.0);
    io::write_field(&f, &stem).unwrap();
    let g = io::read_field(&stem.with_extension("json")).unwrap();
    let phi = build_entropy(&TrigPolynomial::new(0.0, vec![0.0, 0.0, 1.0, 0.2], vec![0.0, 0.0, -0.4, 0.3]));
    let a = entropy_production_in(&f, &phi, 4.0 / n as f64, 0.15).unwrap();
    let b = entropy_production_in(&g, &phi, 4.0 / n as f64, 0.15).unwrap();
    assert_eq!(a, b);
    // signed pairing times the length of the line inside the window
    let side = a.window_side();
    let c = jump.normal();
    let length = side / c.x.abs().max(c.y.abs());
    let want = jump_pairing(&phi, &jump) * length;
    assert!((a.mass() / want - 1.0).abs() < 0.05, "{} vs {want}", a.mass());
}

#[test]
fn kinetic_csv_pairs_like_the_entropy() {
    let jump = JumpConfig::symmetric(0.8);
    let sigma = sigma_jump(&jump, 2048).unwrap();
    let mut buf = Vec::new();
    io::write_kinetic(&mut buf, &sigma).unwrap();
    let back = io::read_kinetic(&buf[..]).unwrap();
    // int psi' sigma ds is the jump pairing of the entropy with the same f,
    // up to the orientation convention fixed by the kinetic module
    let f = TrigPolynomial::cos_mode(2);
    let psi = eikonal_lab::entropy::psi_of(&f);
    let lhs = back.pair(&psi.derivative());
    let rhs = jump_pairing(&build_entropy(&f), &jump);
    assert!((lhs.abs() / rhs.abs() - 1.0).abs() < 1e-3, "{lhs} vs {rhs}");
}
