//! Reference mechanical data of the assembly scenario: rigid hub, solar
//! array, stack, modular tile, reference structures and the three-arm robot.
//!
//! Products of inertia are listed the way the source tables print them:
//! positive products `sum m x y`. The inertia tensor carries their negation
//! (see [`PoiConvention`]).

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::linalg::Mat;
use crate::multibody::{parallel_axis, Dcm, ModalBodyData, RigidBodyData};

/// How the off-diagonal entries of a printed inertia matrix are to be read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoiConvention {
    /// Entries are products of inertia `I_xy = sum m x y`; the tensor holds `-I_xy`.
    Product,
    /// Entries are already tensor components.
    Tensor,
}

/// Builds a symmetric inertia tensor from the printed upper triangle
/// `[xx, xy, xz, yy, yz, zz]`.
pub fn inertia_from_upper(u: [f64; 6], conv: PoiConvention) -> Matrix3<f64> {
    let s = match conv {
        PoiConvention::Product => -1.0,
        PoiConvention::Tensor => 1.0,
    };
    let (xy, xz, yz) = (s * u[1], s * u[2], s * u[4]);
    Matrix3::new(u[0], xy, xz, xy, u[3], yz, xz, yz, u[5])
}

pub fn hz_to_rad(f: f64) -> f64 {
    2.0 * PI * f
}

// Rigid hub.
pub const HUB_MASS: f64 = 166.0;
pub const HUB_INERTIA_UPPER: [f64; 6] = [21.6256, 3.84, 0.0, 15.6256, 0.0, 30.6738];
pub const GP1: [f64; 3] = [0.0, -0.5, 0.0];
pub const GP2: [f64; 3] = [-0.5, 0.5, 0.7125];
pub const GP3: [f64; 3] = [0.5, 0.0, 0.7125];
/// Solar-array frame to hub frame.
pub const P_A_B: [[f64; 3]; 3] = [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];

// Solar array, cantilevered at P1.
pub const SOLAR_MASS: f64 = 88.93;
/// Centre of mass `S1` seen from `P1`, array frame.
pub const P1S1: [f64; 3] = [0.0, 1.0934, 0.0014];
/// Inertia about `S1`, array frame.
pub const SOLAR_INERTIA_UPPER: [f64; 6] = [33.0918, 0.0, 0.0, 7.3819, -0.0002, 40.4578];
pub const SOLAR_FREQS_HZ: [f64; 2] = [1.2850, 6.5896];
pub const SOLAR_DAMPING: f64 = 0.01;
/// Relative uncertainty on the first array mode.
pub const SOLAR_FREQ_UNCERTAINTY: f64 = 0.2;
/// Participation factors as printed: six rows although two modes are listed.
pub const SOLAR_LP: [[f64; 6]; 6] = [
    [-0.0007, -0.0078, 7.8872, 11.7690, 0.0005, 0.0010],
    [-7.9401, 0.0, 0.0007, -0.0008, 0.1089, 12.1014],
    [-0.3604, 0.0, 0.0006, 0.0017, -2.6631, 0.5399],
    [0.0019, -0.0066, 3.9818, 0.9098, -0.0007, -0.0033],
    [0.0272, 0.0003, -0.0145, -0.0019, 0.4907, -0.0221],
    [-0.0010, 0.0357, -2.2185, -0.2320, -0.0029, 0.0012],
];

// Stack of tiles at P3.
pub const P3C0: [f64; 3] = [0.5, 0.0, 0.0];

// Modular tile.
pub const TILE_MASS: f64 = 6.0423;
pub const TILE_INERTIA_UPPER: [f64; 6] = [0.5041, 0.0, 0.0, 0.5041, 0.0, 1.0071];

// Reference structures.
pub const F1_MASS: f64 = 6.0423;
pub const F1_PC: [f64; 3] = [0.5, 0.5, 0.0];
pub const F1_INERTIA_UPPER: [f64; 6] = [2.0147, 1.5106, 0.0, 2.0147, 0.0, 4.0282];
pub const F1_FREQS_HZ: [f64; 3] = [30.7169, 35.1732, 50.2930];
pub const F1_LP: [[f64; 6]; 3] = [
    [-0.2004, 0.2004, 0.0, 0.0, 0.0, 0.6902],
    [0.0, 0.0, -0.3290, -0.5375, 0.5375, 0.0],
    [0.0, 0.0, 0.0, 0.9139, 0.9139, 0.0],
];
pub const F1_PHI_C: [[f64; 3]; 6] = [
    [-1.2677, 0.0, 0.0],
    [1.2677, 0.0, 0.0],
    [0.0, -2.0936, 0.0],
    [0.0, -1.3080, 0.5019],
    [0.0, -0.7856, 0.5019],
    [0.6827, 0.0, 0.0],
];
pub const F26_MASS: f64 = 157.1;
pub const F26_PC: [f64; 3] = [-0.5, 6.5, 0.0];
pub const F26_INERTIA_UPPER: [f64; 6] = [2251.79, 78.55, 0.0, 209.48, 0.0, 2461.24];
pub const F26_FREQS_HZ: [f64; 3] = [0.9120, 2.1, 2.99];
pub const F26_LP: [[f64; 6]; 3] = [
    [0.0, 0.0, -0.1427, -0.0276, 0.0039, 0.0],
    [0.1289, 0.0112, 0.0, 0.0, 0.0, -0.0203],
    [0.0, 0.0, 0.1352, 0.0262, 0.0680, 0.0],
];
pub const F26_PHI_C: [[f64; 3]; 6] = [
    [0.0, 9.9969, 0.0],
    [0.0, -2.7773, 0.0],
    [-10.3108, 0.0, -2.9745],
    [-47.2211, 0.0, 0.0796],
    [-1.0374, 0.0, 12.7970],
    [0.0, -48.1478, 0.0],
];
/// Centre of mass of the 26-tile reference structure. Not printed in the
/// tables; taken from the default layout, which reproduces the printed mass
/// and inertia.
pub const F26_COM: [f64; 3] = [1.0 / 13.0, 85.0 / 26.0, 0.0];
pub const STRUCTURE_DAMPING: f64 = 0.005;

// Robot arm links L0..L5.
pub const LINK_MASSES: [f64; 6] = [5.0, 5.0, 10.0, 5.0, 10.0, 5.0];
pub const LINK_COMS: [[f64; 3]; 6] = [
    [0.0, 0.0, 0.0625],
    [0.0, 0.0, 0.05],
    [-0.1062, 0.0, 0.0],
    [0.0, 0.0, 0.0810],
    [-0.1031, 0.0, 0.0],
    [0.0, 0.0, 0.0810],
];
pub const LINK_MOI: [f64; 6] = [0.2, 0.2, 0.4, 0.2, 0.4, 0.2];

// Robot hub C.
pub const ROBOT_HUB_MASS: f64 = 10.0;
pub const ROBOT_HUB_MOI: f64 = 0.6;
/// `D J6` for arms 1..3, robot-hub frame.
pub const DJ6: [[f64; 3]; 3] = [[0.1, 0.0, 0.0], [-0.05, 0.0, -0.0866], [-0.05, 0.0, 0.0866]];
/// `P_{l5/c}` for arms 1..3 as printed (rounded to three digits).
pub const P_L5_C: [[[f64; 3]; 3]; 3] = [
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    [[-0.5, 0.0, -0.866], [0.0, -1.0, 0.0], [-0.866, 0.0, 0.5]],
    [[-0.5, 0.0, 0.866], [0.0, -1.0, 0.0], [0.866, 0.0, 0.5]],
];

pub fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

pub fn m3(a: [[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::new(a[0][0], a[0][1], a[0][2], a[1][0], a[1][1], a[1][2], a[2][0], a[2][1], a[2][2])
}

/// Hub with ports `P1` (solar array), `P2` (structure) and `P3` (stack).
pub fn hub() -> RigidBodyData {
    RigidBodyData::new("hub", HUB_MASS, inertia_from_upper(HUB_INERTIA_UPPER, PoiConvention::Product))
        .with_port("P1", v3(GP1))
        .with_port("P2", v3(GP2))
        .with_port("P3", v3(GP3))
}

pub fn solar_array_frame() -> Dcm {
    Dcm::new(m3(P_A_B)).expect("exact rotation")
}

/// Solar array cantilevered at `P1`, array frame. Only the first two rows of
/// the printed participation matrix belong to the two listed modes.
pub fn solar_array() -> ModalBodyData {
    let com = v3(P1S1);
    let j_s = inertia_from_upper(SOLAR_INERTIA_UPPER, PoiConvention::Product);
    let n = SOLAR_FREQS_HZ.len();
    ModalBodyData {
        name: String::from("solar_array"),
        mass: SOLAR_MASS,
        inertia_p: parallel_axis(&j_s, SOLAR_MASS, &com),
        com,
        freqs: SOLAR_FREQS_HZ.iter().map(|f| hz_to_rad(*f)).collect(),
        damping: alloc::vec![SOLAR_DAMPING; n],
        l_p: Mat::from_fn(n, 6, |i, j| SOLAR_LP[i][j]),
        phi_c: Mat::zeros(6, n),
        pc: Vector3::zeros(),
    }
}

pub fn tile() -> RigidBodyData {
    RigidBodyData::new("tile", TILE_MASS, inertia_from_upper(TILE_INERTIA_UPPER, PoiConvention::Product))
}

fn reference_structure(
    name: &str,
    mass: f64,
    upper: [f64; 6],
    com: [f64; 3],
    pc: [f64; 3],
    freqs: &[f64],
    lp: &[[f64; 6]],
    phi: &[[f64; 3]; 6],
) -> ModalBodyData {
    let n = freqs.len();
    ModalBodyData {
        name: String::from(name),
        mass,
        inertia_p: inertia_from_upper(upper, PoiConvention::Product),
        com: v3(com),
        freqs: freqs.iter().map(|f| hz_to_rad(*f)).collect(),
        damping: alloc::vec![STRUCTURE_DAMPING; n],
        l_p: Mat::from_fn(n, 6, |i, j| lp[i][j]),
        phi_c: Mat::from_fn(6, n, |i, j| phi[i][j]),
        pc: v3(pc),
    }
}

/// One-tile structure clamped at `P2`, docking port `C1`.
pub fn structure_f1() -> ModalBodyData {
    reference_structure("F1", F1_MASS, F1_INERTIA_UPPER, F1_PC, F1_PC, &F1_FREQS_HZ, &F1_LP, &F1_PHI_C)
}

/// 26-tile structure clamped at `P2`, docking port `C25`.
pub fn structure_f26() -> ModalBodyData {
    reference_structure("F26", F26_MASS, F26_INERTIA_UPPER, F26_COM, F26_PC, &F26_FREQS_HZ, &F26_LP, &F26_PHI_C)
}

/// Six link bodies of one arm, each with ports `Jk` (proximal joint, at the
/// link-frame origin) and `Jk+1` (distal joint).
pub fn arm_links(offsets: &[Vector3<f64>; 6]) -> Vec<RigidBodyData> {
    (0..6)
        .map(|k| {
            let g = v3(LINK_COMS[k]);
            let j = Matrix3::identity() * LINK_MOI[k];
            RigidBodyData::new(&alloc::format!("L{k}"), LINK_MASSES[k], j)
                .with_port("prox", -g)
                .with_port("dist", offsets[k] - g)
        })
        .collect()
}

/// Joint offsets `J_k J_{k+1}` set to twice the printed link centres of mass.
pub fn default_joint_offsets() -> [Vector3<f64>; 6] {
    core::array::from_fn(|k| v3(LINK_COMS[k]) * 2.0)
}

pub fn robot_hub() -> RigidBodyData {
    RigidBodyData::new("robot_hub", ROBOT_HUB_MASS, Matrix3::identity() * ROBOT_HUB_MOI)
        .with_port("J6_1", v3(DJ6[0]))
        .with_port("J6_2", v3(DJ6[1]))
        .with_port("J6_3", v3(DJ6[2]))
}

/// `P_{l5/c}` of arm `k` (1-based), re-orthonormalised from the printed values.
pub fn arm_to_robot_hub(k: usize) -> Dcm {
    Dcm::from_rounded(m3(P_L5_C[k - 1]), 1e-3).expect("printed DCM is a rounded rotation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multibody::check_inertia;

    #[test]
    fn printed_inertias_are_physical() {
        for u in [HUB_INERTIA_UPPER, SOLAR_INERTIA_UPPER, TILE_INERTIA_UPPER, F1_INERTIA_UPPER, F26_INERTIA_UPPER] {
            check_inertia(&inertia_from_upper(u, PoiConvention::Product)).unwrap();
        }
    }

    #[test]
    fn f1_is_one_tile_transported_to_p2() {
        // the printed F1 inertia is the tile inertia moved to the tile corner
        let t = tile();
        let j = parallel_axis(&t.inertia_g, t.mass, &v3(F1_PC));
        let f1 = structure_f1();
        assert!((j - f1.inertia_p).amax() < 1e-4);
    }

    #[test]
    fn solar_array_data() {
        let s = solar_array();
        assert_eq!(s.mass, 88.93);
        assert_eq!(s.n_modes(), 2);
        assert_eq!(SOLAR_LP.len(), 6);
        assert!((s.freqs[0] - 2.0 * PI * 1.285).abs() < 1e-12);
        let w = s.validate().unwrap();
        assert!(w.is_empty(), "{w:?}");
    }

    #[test]
    fn robot_data() {
        let offs = default_joint_offsets();
        assert!((offs[2] - Vector3::new(-0.2124, 0.0, 0.0)).norm() < 1e-15);
        assert_eq!(LINK_MASSES.iter().sum::<f64>(), 40.0);
        for k in 1..=3 {
            let r = arm_to_robot_hub(k);
            assert!((r.matrix() - m3(P_L5_C[k - 1])).amax() < 1e-3);
        }
    }
}
