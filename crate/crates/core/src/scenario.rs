//! Complete spacecraft for one assembly state: hub, solar array, stack,
//! flexible structure docked at `C_j`, the walking robot (and the tile it may
//! carry), plus the baseline attitude loop.
//!
//! All external channels are expressed in the hub frame `b` at the hub centre
//! of mass `G`, except `W_ext` which is a wrench on the structure at the
//! docking port, structure frame.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix3, Matrix6, SymmetricEigen, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{frame6, Mat};
use crate::linss::{Network, StateSpace};
use crate::modal::{build_lattice, modal_basis, reduce_basis, LatticeParams, ModalBasis, TileLayout};
use crate::multibody::{
    mode_freq_lfr, parallel_axis, rigid_nport, rigid_nport_inverted, spatial_mass_at, titop_two_port, Dcm,
    ModalBodyData, RigidBodyData,
};
use crate::robot::{arm_frames, arm_two_port, ArmFrames, ArmGeometry, Chain, JointVector, Pose};
use crate::tables;

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    /// Hub with ports `P1`, `P2`, `P3`.
    pub hub: RigidBodyData,
    pub solar: ModalBodyData,
    /// `P_{a/b}`, solar-array frame to hub frame.
    pub solar_frame: Dcm,
    /// `P_{f/b}`, structure frame to hub frame.
    pub structure_frame: Dcm,
    /// `P_{s/b}`, stack frame to hub frame.
    pub stack_frame: Dcm,
    /// Top of the stack `C0` seen from `P3`, stack frame.
    pub p3c0: Vector3<f64>,
    pub tile: RigidBodyData,
    /// Total number of tiles `N`.
    pub n_total: usize,
    pub layout: TileLayout,
    pub lattice: LatticeParams,
    pub n_modes: usize,
    pub structure_damping: f64,
    pub arms: [ArmGeometry; 3],
    /// Robot hub with ports `J6_1`, `J6_2`, `J6_3`.
    pub robot_hub: RigidBodyData,
    /// `P_{l5/c}` of each arm.
    pub arm_mounts: [Dcm; 3],
    pub xi_att: f64,
    pub omega_att_hz: f64,
    /// Relative uncertainty of the first solar-array mode.
    pub r_omega: f64,
    /// Waypoints per trajectory leg.
    pub z: usize,
    /// Tiles whose centre lies within this distance of `C0` can reach the stack.
    pub stack_reach: f64,
}

impl ScenarioConfig {
    /// Printed spacecraft data with `n_total` tiles on the default band layout.
    pub fn reference(n_total: usize) -> Self {
        let arm = ArmGeometry::table_default();
        ScenarioConfig {
            hub: tables::hub(),
            solar: tables::solar_array(),
            solar_frame: tables::solar_array_frame(),
            structure_frame: Dcm::identity(),
            stack_frame: Dcm::identity(),
            p3c0: tables::v3(tables::P3C0),
            tile: tables::tile(),
            n_total,
            layout: TileLayout::band(n_total.max(1)),
            lattice: LatticeParams::default(),
            n_modes: 6,
            structure_damping: tables::STRUCTURE_DAMPING,
            arms: [arm.clone(), arm.clone(), arm],
            robot_hub: tables::robot_hub(),
            arm_mounts: [
                tables::arm_to_robot_hub(1),
                tables::arm_to_robot_hub(2),
                tables::arm_to_robot_hub(3),
            ],
            xi_att: 1.0,
            omega_att_hz: 0.01,
            r_omega: tables::SOLAR_FREQ_UNCERTAINTY,
            z: 7,
            stack_reach: 1.5,
        }
    }

    pub fn validate(&self) -> Result<Vec<alloc::string::String>> {
        if self.n_total == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if self.layout.len() < self.n_total {
            return Err(Error::Config(alloc::format!(
                "layout has {} cells for N = {}",
                self.layout.len(),
                self.n_total
            )));
        }
        self.layout.check_order()?;
        self.hub.validate().map_err(Error::Config)?;
        self.tile.validate().map_err(Error::Config)?;
        self.robot_hub.validate().map_err(Error::Config)?;
        for p in ["P1", "P2", "P3"] {
            self.hub.port(p)?;
        }
        for k in 1..=3 {
            self.robot_hub.port(&alloc::format!("J6_{k}"))?;
        }
        for a in &self.arms {
            a.validate()?;
        }
        if !(self.r_omega > 0.0 && self.r_omega < 1.0) {
            return Err(Error::InvalidBound(self.r_omega));
        }
        if self.z < 2 {
            return Err(Error::Config(alloc::format!("grid size z = {} below 2", self.z)));
        }
        if !(self.xi_att >= 0.0 && self.omega_att_hz >= 0.0) {
            return Err(Error::Config("controller parameters must be non-negative".into()));
        }
        self.solar.validate()
    }

    /// Clamping point `P2` in the hub frame.
    pub fn p2(&self) -> Vector3<f64> {
        self.hub.port("P2").expect("validated hub")
    }

    /// Structure-frame point in the hub frame.
    pub fn structure_to_hub(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.p2() + self.structure_frame.matrix() * v
    }

    /// Stack top `C0`, structure frame.
    pub fn stack_point(&self) -> Vector3<f64> {
        let c0 = self.hub.port("P3").expect("validated hub") + self.stack_frame.matrix() * self.p3c0;
        self.structure_frame.matrix().transpose() * (c0 - self.p2())
    }
}

/// Discrete assembly state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssemblyState {
    /// Tiles assembled.
    pub n: usize,
    /// Docking tile (1-based).
    pub j: usize,
    /// Gripping arm, 1 or 2.
    pub arm: usize,
    /// Whether arm 3 carries a tile.
    pub carrying: bool,
}

impl AssemblyState {
    pub fn delta(&self) -> usize {
        self.carrying as usize
    }

    pub fn validate(&self, n_total: usize) -> Result<()> {
        if self.n == 0 || self.n > n_total {
            return Err(Error::StateInvalid(alloc::format!("n = {} outside 1..={n_total}", self.n)));
        }
        if self.j == 0 || self.j > self.n {
            return Err(Error::StateInvalid(alloc::format!("j = {} outside 1..={}", self.j, self.n)));
        }
        if self.arm != 1 && self.arm != 2 {
            return Err(Error::StateInvalid(alloc::format!("gripping arm {} is not 1 or 2", self.arm)));
        }
        Ok(())
    }

    /// The walking arm that is not gripping.
    pub fn free_arm(&self) -> usize {
        3 - self.arm
    }
}

/// Every `(n, j, arm, delta)` combination: `2N(N+1)` states. States with
/// `n = N` and `delta = 1` have no tile left to carry and are rejected by
/// [`stack_properties`].
pub fn enumerate_model_family(n_total: usize) -> Vec<AssemblyState> {
    let mut out = Vec::with_capacity(2 * n_total * (n_total + 1));
    for n in 1..=n_total {
        for j in 1..=n {
            for arm in 1..=2 {
                for carrying in [false, true] {
                    out.push(AssemblyState { n, j, arm, carrying });
                }
            }
        }
    }
    out
}

/// Stack of `N - n - delta` tiles, centre of mass at `C0`, port `P3`.
pub fn stack_properties(n_total: usize, n: usize, delta: usize, tile: &RigidBodyData) -> Result<RigidBodyData> {
    if n + delta > n_total {
        return Err(Error::NegativeCount {
            total: n_total,
            assembled: n,
            carried: delta,
        });
    }
    let k = (n_total - n - delta) as f64;
    Ok(RigidBodyData::new("stack", tile.mass * k, tile.inertia_g * k))
}

/// Structure models for every size `n` (one eigen-solve per size) plus
/// optional per-`(n, j)` data supplied from files.
#[derive(Clone, Debug, Default)]
pub struct StructureBank {
    bases: BTreeMap<usize, ModalBasis>,
    overrides: BTreeMap<(usize, usize), ModalBodyData>,
    damping: f64,
}

impl StructureBank {
    pub fn from_lattice(cfg: &ScenarioConfig) -> Result<Self> {
        let mut bases = BTreeMap::new();
        for n in 1..=cfg.n_total {
            let layout = cfg.layout.prefix(n)?;
            let model = build_lattice(&layout, &cfg.lattice)?;
            let modes = cfg.n_modes.min(6 * n);
            bases.insert(n, modal_basis(model, modes)?);
        }
        Ok(StructureBank {
            bases,
            overrides: BTreeMap::new(),
            damping: cfg.structure_damping,
        })
    }

    pub fn empty(damping: f64) -> Self {
        StructureBank {
            bases: BTreeMap::new(),
            overrides: BTreeMap::new(),
            damping,
        }
    }

    pub fn insert(&mut self, n: usize, j: usize, data: ModalBodyData) {
        self.overrides.insert((n, j), data);
    }

    pub fn structure(&self, n: usize, j: usize) -> Result<ModalBodyData> {
        if let Some(d) = self.overrides.get(&(n, j)) {
            return Ok(d.clone());
        }
        let basis = self.bases.get(&n).ok_or(Error::MissingStructureData { n, j })?;
        if j == 0 || j > n {
            return Err(Error::MissingStructureData { n, j });
        }
        reduce_basis(basis, &Vector3::zeros(), j, self.damping)
    }
}

/// Placement of one arm in the hub frame: `world = base + base_rot * local`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArmPlacement {
    pub base: Vector3<f64>,
    pub base_rot: Matrix3<f64>,
    pub frames: ArmFrames,
}

impl ArmPlacement {
    pub fn joint(&self, k: usize) -> Vector3<f64> {
        self.base + self.base_rot * self.frames.origins[k]
    }

    pub fn link_rot(&self, k: usize) -> Matrix3<f64> {
        self.base_rot * self.frames.rotations[k]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobotPlacement {
    pub arms: [ArmPlacement; 3],
    /// Robot hub centre of mass `D`, hub frame.
    pub hub_origin: Vector3<f64>,
    /// `P_{c/b}`.
    pub hub_rot: Matrix3<f64>,
}

/// Places the robot with arm `grip`'s `J0` at the docking point (hub frame)
/// and its base frame aligned with the structure frame.
pub fn place_robot(cfg: &ScenarioConfig, grip: usize, dock: &Vector3<f64>, q: &[JointVector; 3]) -> Result<RobotPlacement> {
    let x = grip - 1;
    let fx = arm_frames(&cfg.arms[x], &q[x])?;
    let px = ArmPlacement {
        base: *dock,
        base_rot: *cfg.structure_frame.matrix(),
        frames: fx,
    };
    let r_c = px.link_rot(5) * cfg.arm_mounts[x].matrix().transpose();
    let d = px.joint(6) - r_c * cfg.robot_hub.port(&alloc::format!("J6_{grip}"))?;
    let mut placed: [Option<ArmPlacement>; 3] = [None, None, None];
    placed[x] = Some(px);
    for k in 0..3 {
        if k == x {
            continue;
        }
        let fk = arm_frames(&cfg.arms[k], &q[k])?;
        let r_l5 = r_c * cfg.arm_mounts[k].matrix();
        let j6 = d + r_c * cfg.robot_hub.port(&alloc::format!("J6_{}", k + 1))?;
        let base_rot = r_l5 * fk.rotations[5].transpose();
        let base = j6 - base_rot * fk.origins[6];
        placed[k] = Some(ArmPlacement {
            base,
            base_rot,
            frames: fk,
        });
    }
    let [a, b, c] = placed;
    Ok(RobotPlacement {
        arms: [a.expect("placed"), b.expect("placed"), c.expect("placed")],
        hub_origin: d,
        hub_rot: r_c,
    })
}

/// Kinematic chain from the gripping arm's `J0` to the `J0` of arm `other`,
/// through the robot hub. Joint vector: gripping arm first, then `other`.
pub fn walking_chain(cfg: &ScenarioConfig, grip: usize, other: usize) -> Result<Chain> {
    let (x, y) = (grip - 1, other - 1);
    let djx = cfg.robot_hub.port(&alloc::format!("J6_{grip}"))?;
    let djy = cfg.robot_hub.port(&alloc::format!("J6_{other}"))?;
    Ok(Chain::arm(&cfg.arms[x], 0)
        .fixed(Vector3::zeros(), cfg.arm_mounts[x].matrix().transpose())
        .fixed(djy - djx, *cfg.arm_mounts[y].matrix())
        .then(Chain::arm_reversed(&cfg.arms[y], 5)))
}

/// Pose of arm `other`'s `J0` relative to the gripping arm's `J0`, in the
/// gripping arm's base frame.
pub fn reach_pose(cfg: &ScenarioConfig, grip: usize, other: usize, qx: &JointVector, qy: &JointVector) -> Result<Pose> {
    let chain = walking_chain(cfg, grip, other)?;
    let mut v = qx.0.to_vec();
    v.extend_from_slice(&qy.0);
    Ok(chain.pose(&v))
}

/// Centre of mass of the robot (arms and robot hub, no carried tile), hub
/// frame.
pub fn robot_com(cfg: &ScenarioConfig, state: &AssemblyState, q: &[JointVector; 3]) -> Result<Vector3<f64>> {
    let dock = cfg.structure_to_hub(&dock_point(cfg, state)?);
    let robot = place_robot(cfg, state.arm, &dock, q)?;
    let mut m = cfg.robot_hub.mass;
    let mut s = robot.hub_origin * cfg.robot_hub.mass;
    for (k, arm) in robot.arms.iter().enumerate() {
        for (i, link) in cfg.arms[k].links.iter().enumerate() {
            let com = arm.joint(i) - arm.link_rot(i) * link.port("prox")?;
            s += com * link.mass;
            m += link.mass;
        }
    }
    Ok(s / m)
}

fn mass_at_g(m: f64, com: &Vector3<f64>, j_com: &Matrix3<f64>) -> Matrix6<f64> {
    spatial_mass_at(m, com, &parallel_axis(j_com, m, com))
}

fn flexible_at_g(d: &ModalBodyData, p: &Vector3<f64>, r: &Matrix3<f64>) -> Matrix6<f64> {
    let c = d.com;
    let j_com = d.inertia_p - (Matrix3::identity() * c.norm_squared() - c * c.transpose()) * d.mass;
    mass_at_g(d.mass, &(p + r * c), &(r * j_com * r.transpose()))
}

fn rigid_at_g(b: &RigidBodyData, com: &Vector3<f64>, r: &Matrix3<f64>) -> Matrix6<f64> {
    mass_at_g(b.mass, com, &(r * b.inertia_g * r.transpose()))
}

/// Spatial mass matrix of the whole spacecraft about `G`, hub frame, summed
/// body by body from their placements.
pub fn composite_spatial_mass(
    cfg: &ScenarioConfig,
    bank: &StructureBank,
    state: &AssemblyState,
    q: &[JointVector; 3],
) -> Result<Matrix6<f64>> {
    state.validate(cfg.n_total)?;
    let mut m = rigid_at_g(&cfg.hub, &Vector3::zeros(), &Matrix3::identity());
    m += flexible_at_g(&cfg.solar, &cfg.hub.port("P1")?, cfg.solar_frame.matrix());
    let stack = stack_properties(cfg.n_total, state.n, state.delta(), &cfg.tile)?;
    let c0 = cfg.hub.port("P3")? + cfg.stack_frame.matrix() * cfg.p3c0;
    m += rigid_at_g(&stack, &c0, cfg.stack_frame.matrix());
    let structure = bank.structure(state.n, state.j)?;
    m += flexible_at_g(&structure, &cfg.p2(), cfg.structure_frame.matrix());
    let dock = cfg.structure_to_hub(&dock_point(cfg, state)?);
    let robot = place_robot(cfg, state.arm, &dock, q)?;
    for (k, arm) in robot.arms.iter().enumerate() {
        for (i, link) in cfg.arms[k].links.iter().enumerate() {
            let r = arm.link_rot(i);
            let com = arm.joint(i) - r * link.port("prox")?;
            m += rigid_at_g(link, &com, &r);
        }
    }
    m += rigid_at_g(&cfg.robot_hub, &robot.hub_origin, &robot.hub_rot);
    if state.carrying {
        let a3 = &robot.arms[2];
        m += rigid_at_g(&cfg.tile, &a3.joint(0), &a3.link_rot(0));
    }
    Ok(m)
}

/// Docking tile centre, structure frame.
pub fn dock_point(cfg: &ScenarioConfig, state: &AssemblyState) -> Result<Vector3<f64>> {
    cfg.layout
        .tile_center(state.j)
        .ok_or(Error::MissingStructureData { n: state.n, j: state.j })
}

/// Rigid-composite inertia of all bodies about `G`, hub frame.
pub fn total_inertia(
    cfg: &ScenarioConfig,
    bank: &StructureBank,
    state: &AssemblyState,
    q: &[JointVector; 3],
) -> Result<Matrix3<f64>> {
    let m = composite_spatial_mass(cfg, bank, state, q)?;
    Ok(m.fixed_view::<3, 3>(3, 3).into_owned())
}

/// Inertia seen by a pure torque on the free-floating spacecraft: the
/// composite inertia about the system centre of mass, hub axes.
pub fn effective_inertia(m_g: &Matrix6<f64>) -> Matrix3<f64> {
    let m = m_g[(0, 0)];
    let b = m_g.fixed_view::<3, 3>(0, 3).into_owned();
    m_g.fixed_view::<3, 3>(3, 3).into_owned() - b.transpose() * b / m
}

/// `K_att = [k_att c_att]` with `k_att = -w^2 J`, `c_att = -2 xi w J`, `w`
/// given in Hz.
pub fn attitude_gains(j: &Matrix3<f64>, xi: f64, omega_hz: f64) -> Mat {
    let w = 2.0 * PI * omega_hz;
    let mut k = Mat::zeros(3, 6);
    for r in 0..3 {
        for c in 0..3 {
            k[(r, c)] = -w * w * j[(r, c)];
            k[(r, 3 + c)] = -2.0 * xi * w * j[(r, c)];
        }
    }
    k
}

fn stack_block(cfg: &ScenarioConfig, state: &AssemblyState) -> Result<StateSpace> {
    let s = stack_properties(cfg.n_total, state.n, state.delta(), &cfg.tile)?.with_port("P3", -cfg.p3c0);
    rigid_nport_inverted(&s, "P3", &[])
}

fn sel(rows: usize, offset: usize, width: usize) -> Mat {
    let mut m = Mat::zeros(rows, width);
    for i in 0..rows {
        m[(i, offset + i)] = 1.0;
    }
    m
}

/// Open-loop plant.
///
/// Inputs: `F_ext`, `T_ext` (on the hub at `G`), `W_ext` (on the structure at
/// the docking port), `w_omega`. Outputs: `a_G`, `omega_dot_G`, `z_omega`,
/// `xdd_dock`.
pub fn build_open_loop(
    cfg: &ScenarioConfig,
    bank: &StructureBank,
    state: &AssemblyState,
    q: &[JointVector; 3],
) -> Result<StateSpace> {
    state.validate(cfg.n_total)?;
    let grip = state.arm;
    let other = state.free_arm();
    let mut net = Network::new();

    let hub = net.add("hub", rigid_nport(&cfg.hub, &["P1", "P2", "P3"])?);
    let solar = net.add("solar_array", mode_freq_lfr(&cfg.solar, 0, cfg.r_omega)?);
    let stack = net.add("stack", stack_block(cfg, state)?);
    let structure = net.add("structure", titop_two_port(&bank.structure(state.n, state.j)?)?);

    let fa = frame6(cfg.solar_frame.matrix());
    let ff = frame6(cfg.structure_frame.matrix());
    let fs = frame6(cfg.stack_frame.matrix());
    net.connect_gain(hub, "xdd_P1", solar, "xdd_P", fa.transpose());
    net.connect_gain(solar, "W_P", hub, "W_P1", fa);
    net.connect_gain(hub, "xdd_P2", structure, "xdd_P", ff.transpose());
    net.connect_gain(structure, "W_P", hub, "W_P2", ff);
    net.connect_gain(hub, "xdd_P3", stack, "xdd_P3", fs.transpose());
    net.connect_gain(stack, "W_P3", hub, "W_P3", fs);

    // robot: gripping arm from the docking port up to the robot hub, the
    // other two arms hang from the robot hub with free tips
    let ax = net.add("arm_grip", arm_two_port(&cfg.arms[grip - 1], &q[grip - 1], false)?);
    let jx = alloc::format!("J6_{grip}");
    let jy = alloc::format!("J6_{other}");
    let rhub = net.add("robot_hub", rigid_nport_inverted(&cfg.robot_hub, &jx, &[&jy, "J6_3"])?);
    let ay = net.add("arm_free", arm_two_port(&cfg.arms[other - 1], &q[other - 1], true)?);
    let a3 = net.add("arm_3", arm_two_port(&cfg.arms[2], &q[2], true)?);
    net.connect(structure, "xdd_C", ax, "xdd_J0");
    net.connect(ax, "W_J0", structure, "W_C");
    let px = frame6(cfg.arm_mounts[grip - 1].matrix());
    let py = frame6(cfg.arm_mounts[other - 1].matrix());
    let p3 = frame6(cfg.arm_mounts[2].matrix());
    net.connect_gain(ax, "xdd_J6", rhub, &alloc::format!("xdd_{jx}"), px.clone());
    net.connect_gain(rhub, &alloc::format!("W_{jx}"), ax, "W_J6", px.transpose());
    net.connect_gain(rhub, &alloc::format!("xdd_{jy}"), ay, "xdd_J6", py.transpose());
    net.connect_gain(ay, "W_J6", rhub, &alloc::format!("W_{jy}"), py);
    net.connect_gain(rhub, "xdd_J6_3", a3, "xdd_J6", p3.transpose());
    net.connect_gain(a3, "W_J6", rhub, "W_J6_3", p3);
    if state.carrying {
        let t = cfg.tile.clone().with_port("J0", Vector3::zeros());
        let tile = net.add("tile", rigid_nport_inverted(&t, "J0", &[])?);
        net.connect(a3, "xdd_J0", tile, "xdd_J0");
        net.connect(tile, "W_J0", a3, "W_J0");
    }

    net.input("F_ext", 3, &[(hub, "W_G", Some(sel(3, 0, 6).transpose()))]);
    net.input("T_ext", 3, &[(hub, "W_G", Some(sel(3, 3, 6).transpose()))]);
    net.input("W_ext", 6, &[(structure, "W_C", None)]);
    net.input("w_omega", 2, &[(solar, "w_omega", None)]);
    net.output("a_G", hub, "xdd_G", Some(sel(3, 0, 6)));
    net.output("omega_dot_G", hub, "xdd_G", Some(sel(3, 3, 6)));
    net.output("z_omega", solar, "z_omega", None);
    net.output("xdd_dock", structure, "xdd_C", None);
    net.build()
}

/// Rigid single-body plant from a spatial mass matrix at `G`: inputs
/// `F_ext`, `T_ext`; outputs `a_G`, `omega_dot_G`.
pub fn rigid_plant(m_g: &Matrix6<f64>) -> Result<StateSpace> {
    let inv = m_g.try_inverse().ok_or_else(|| Error::SingularInertia("composite".into()))?;
    let d = Mat::from_fn(6, 6, |i, j| inv[(i, j)]);
    StateSpace::gain(
        d,
        crate::linss::channels(&[("F_ext", 3), ("T_ext", 3)]),
        crate::linss::channels(&[("a_G", 3), ("omega_dot_G", 3)]),
    )
}

/// Closes the attitude loop `u = K_att [Theta; omega]` around a plant with
/// `T_ext` and `omega_dot_G`.
///
/// Inputs: `d_t` plus the plant's `W_ext`, `w_omega`, `F_ext` when present.
/// Outputs: `e_t = d_t + u`, `omega_dot_G`, `omega_G`, `theta_G`, and the
/// plant's `a_G`, `z_omega` when present.
pub fn close_loop(plant: &StateSpace, k_att: &Mat) -> Result<StateSpace> {
    if k_att.nrows() != 3 || k_att.ncols() != 6 {
        return Err(Error::Dimension(alloc::format!(
            "attitude gain is {}x{}, expected 3x6",
            k_att.nrows(),
            k_att.ncols()
        )));
    }
    let mut net = Network::new();
    let p = net.add("plant", plant.clone());

    // states [omega; theta]
    let mut a = Mat::zeros(6, 6);
    a.view_mut((3, 0), (3, 3)).fill_with_identity();
    let b = sel(3, 0, 6).transpose();
    let mut c = Mat::zeros(12, 6);
    c.view_mut((0, 0), (3, 3)).fill_with_identity();
    c.view_mut((3, 3), (3, 3)).fill_with_identity();
    c.view_mut((6, 3), (3, 3)).fill_with_identity();
    c.view_mut((9, 0), (3, 3)).fill_with_identity();
    let integ = net.add(
        "integrators",
        StateSpace::new(
            a,
            b,
            c,
            Mat::zeros(12, 3),
            crate::linss::channels(&[("omega_dot", 3)]),
            crate::linss::channels(&[("omega_G", 3), ("theta_G", 3), ("y", 6)]),
        )?,
    );
    let ctrl = net.add(
        "controller",
        StateSpace::gain(
            k_att.clone(),
            crate::linss::channels(&[("y", 6)]),
            crate::linss::channels(&[("u", 3)]),
        )?,
    );
    let mut sum_d = Mat::zeros(3, 6);
    sum_d.view_mut((0, 0), (3, 3)).fill_with_identity();
    sum_d.view_mut((0, 3), (3, 3)).fill_with_identity();
    let sum = net.add(
        "torque_sum",
        StateSpace::gain(
            sum_d,
            crate::linss::channels(&[("d_t", 3), ("u", 3)]),
            crate::linss::channels(&[("e", 3)]),
        )?,
    );
    net.connect(sum, "e", p, "T_ext");
    net.connect(p, "omega_dot_G", integ, "omega_dot");
    net.connect(integ, "y", ctrl, "y");
    net.connect(ctrl, "u", sum, "u");

    net.input("d_t", 3, &[(sum, "d_t", None)]);
    for ch in ["W_ext", "w_omega", "F_ext"] {
        if plant.has_input(ch) {
            net.pass_input(p, ch)?;
        }
    }
    net.output("e_t", sum, "e", None);
    net.output("omega_dot_G", p, "omega_dot_G", None);
    net.output("omega_G", integ, "omega_G", None);
    net.output("theta_G", integ, "theta_G", None);
    for ch in ["a_G", "z_omega"] {
        if plant.has_output(ch) {
            net.output(ch, p, ch, None);
        }
    }
    net.build()
}

/// Assembly model context: configuration, structure data and the attitude
/// controller shared by every closed loop.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub bank: StructureBank,
    pub k_att: Mat,
    /// Inertia the controller was sized on and the state it came from.
    pub sizing_inertia: Matrix3<f64>,
    pub sizing_state: AssemblyState,
}

impl Scenario {
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let bank = StructureBank::from_lattice(&cfg)?;
        Scenario::with_bank(cfg, bank)
    }

    /// The controller is sized on the worst-case inertia: largest principal
    /// inertia seen by the torque over every docking tile of the largest
    /// structure that still leaves a tile to carry, either gripping arm, home
    /// pose, tile carried.
    pub fn with_bank(cfg: ScenarioConfig, bank: StructureBank) -> Result<Self> {
        let n = if cfg.n_total > 1 { cfg.n_total - 1 } else { 1 };
        let carrying = cfg.n_total > 1;
        let home = [JointVector::zero(); 3];
        let mut best: Option<(f64, Matrix3<f64>, AssemblyState)> = None;
        for j in 1..=n {
            for arm in 1..=2 {
                let s = AssemblyState { n, j, arm, carrying };
                let m = composite_spatial_mass(&cfg, &bank, &s, &home)?;
                let jeff = effective_inertia(&m);
                let lmax = SymmetricEigen::new(jeff).eigenvalues.max();
                if best.as_ref().map_or(true, |b| lmax > b.0) {
                    best = Some((lmax, jeff, s));
                }
            }
        }
        let (_, jw, s) = best.expect("at least one state");
        let k_att = attitude_gains(&jw, cfg.xi_att, cfg.omega_att_hz);
        Ok(Scenario {
            cfg,
            bank,
            k_att,
            sizing_inertia: jw,
            sizing_state: s,
        })
    }

    pub fn open_loop(&self, state: &AssemblyState, q: &[JointVector; 3]) -> Result<StateSpace> {
        build_open_loop(&self.cfg, &self.bank, state, q)
    }

    pub fn closed_loop(&self, state: &AssemblyState, q: &[JointVector; 3]) -> Result<StateSpace> {
        close_loop(&self.open_loop(state, q)?, &self.k_att)
    }

    pub fn composite(&self, state: &AssemblyState, q: &[JointVector; 3]) -> Result<Matrix6<f64>> {
        composite_spatial_mass(&self.cfg, &self.bank, state, q)
    }
}
