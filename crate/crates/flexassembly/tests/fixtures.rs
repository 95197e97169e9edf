use std::path::PathBuf;

use flexassembly::config::{load_scenario, parse_file, ModalBodyFile};
use flexassembly::core::multibody::{ModalBodyData, RigidBodyData};
use flexassembly::core::scenario::ScenarioConfig;
use flexassembly::core::tables;
use flexassembly::validate::{validate_file, validate_scenario, Level};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn same_rigid(a: &RigidBodyData, b: &RigidBodyData) {
    assert!(close(a.mass, b.mass), "{} mass", a.name);
    assert!((a.inertia_g - b.inertia_g).amax() < 1e-9, "{} inertia", a.name);
    for (p, v) in &b.ports {
        assert!((a.port(p).unwrap() - v).norm() < 1e-12, "{} port {p}", a.name);
    }
}

fn same_modal(a: &ModalBodyData, b: &ModalBodyData) {
    assert!(close(a.mass, b.mass), "{} mass", a.name);
    assert!((a.inertia_p - b.inertia_p).amax() < 1e-9, "{} inertia", a.name);
    assert!((a.com - b.com).norm() < 1e-12, "{} com", a.name);
    assert!((a.pc - b.pc).norm() < 1e-12, "{} pc", a.name);
    assert_eq!(a.freqs.len(), b.freqs.len());
    for (x, y) in a.freqs.iter().zip(&b.freqs) {
        assert!(close(*x, *y), "{} frequency {x} vs {y}", a.name);
    }
    assert_eq!(a.damping, b.damping);
    assert!((&a.l_p - &b.l_p).amax() < 1e-12, "{} L_P", a.name);
    assert!((&a.phi_c - &b.phi_c).amax() < 1e-12, "{} Phi_C", a.name);
}

#[test]
fn desk_scenario_matches_reference_tables() {
    let loaded = load_scenario(&data("scenario_desk.toml")).unwrap();
    let cfg = loaded.config().unwrap();
    let want = ScenarioConfig::reference(4);
    same_rigid(&cfg.hub, &want.hub);
    same_rigid(&cfg.tile, &want.tile);
    same_rigid(&cfg.robot_hub, &want.robot_hub);
    same_modal(&cfg.solar, &want.solar);
    assert!((cfg.solar_frame.matrix() - want.solar_frame.matrix()).amax() < 1e-12);
    for k in 0..3 {
        assert!((cfg.arm_mounts[k].matrix() - want.arm_mounts[k].matrix()).amax() < 1e-9);
        assert_eq!(cfg.arms[k].axes, want.arms[k].axes);
        for (a, b) in cfg.arms[k].offsets.iter().zip(&want.arms[k].offsets) {
            assert!((a - b).norm() < 1e-12);
        }
        for (a, b) in cfg.arms[k].links.iter().zip(&want.arms[k].links) {
            same_rigid(a, b);
        }
    }
    assert_eq!(cfg.layout, want.layout);
    assert!(close(cfg.lattice.k_trans, want.lattice.k_trans));
    assert!(close(cfg.lattice.k_rot, want.lattice.k_rot));
    assert_eq!(cfg.lattice.diag_factor, want.lattice.diag_factor);
    assert_eq!(cfg.lattice.clamp_factor, want.lattice.clamp_factor);
    assert!((cfg.p3c0 - want.p3c0).norm() < 1e-12);
    assert!(close(cfg.omega_att_hz, want.omega_att_hz));
    assert_eq!(
        (cfg.n_total, cfg.n_modes, cfg.z, cfg.xi_att, cfg.r_omega, cfg.stack_reach),
        (want.n_total, want.n_modes, want.z, want.xi_att, want.r_omega, want.stack_reach)
    );
}

#[test]
fn reference_structures_match_tables() {
    let f1: ModalBodyFile = parse_file(&data("structure_f1.toml")).unwrap();
    let mut want = tables::structure_f1();
    want.name = "F1_C1".into();
    let got = f1.to_body().unwrap();
    same_modal(&ModalBodyData { name: want.name.clone(), ..got }, &want);
    let f26: ModalBodyFile = parse_file(&data("structure_f26.toml")).unwrap();
    let got = f26.to_body().unwrap();
    let want = tables::structure_f26();
    same_modal(&ModalBodyData { name: want.name.clone(), ..got }, &want);
}

#[test]
fn shipped_data_validates() {
    for s in ["scenario_desk.toml", "scenario_reference.toml"] {
        let r = validate_scenario(&load_scenario(&data(s)).unwrap());
        assert!(r.worst() < Level::Fail, "{s}: {:?}", r.lines());
    }
    for f in ["hub.toml", "tile.toml", "solar_array.toml", "robot.toml", "structure_f1.toml", "structure_f26.toml"] {
        let r = validate_file(&data(f)).unwrap();
        assert!(r.worst() < Level::Fail, "{f}: {:?}", r.lines());
    }
}

#[test]
fn zero_damping_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("solar_array.toml")).unwrap().replace("damping = [0.01]", "damping = [0.0]");
    let p = dir.path().join("solar.toml");
    std::fs::write(&p, text).unwrap();
    let r = validate_file(&p).unwrap();
    assert_eq!(r.worst(), Level::Fail);
    assert!(r.lines().iter().any(|l| l.contains("damping")));
}

#[test]
fn disconnected_layout_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["hub.toml", "tile.toml", "solar_array.toml", "robot.toml"] {
        std::fs::copy(data(f), dir.path().join(f)).unwrap();
    }
    let text = std::fs::read_to_string(data("scenario_desk.toml"))
        .unwrap()
        .replace("[layout]\nkind = \"band\"", "[layout]\nkind = \"cells\"\ncells = [[0, 0], [0, 1], [0, 2], [0, 5]]\nclamp = [[0, 0]]");
    let p = dir.path().join("scenario.toml");
    std::fs::write(&p, text).unwrap();
    let r = validate_scenario(&load_scenario(&p).unwrap());
    assert_eq!(r.worst(), Level::Fail);
    assert!(r.lines().iter().any(|l| l.starts_with("FAIL layout")), "{:?}", r.lines());
}
