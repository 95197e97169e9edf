//! Three-arm walking robot: per-arm serial chains of rigid links, forward and
//! inverse kinematics, and quintic joint trajectories.
//!
//! Link `k` has its frame `l_k` at joint `J_k`. Joint `k` (1..=5) rotates
//! `l_k` relative to `l_{k-1}` about `axes[k-1]`: `P_{l_k/l_{k-1}} = Rot(axis, alpha_k)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{frame6, Mat};
use crate::linss::{invert_channels, Network, StateSpace};
use crate::multibody::{rigid_nport_inverted, Dcm, RigidBodyData};
use crate::tables;

pub const N_JOINTS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct ArmGeometry {
    /// `J_k J_{k+1}` in link frame `l_k`.
    pub offsets: [Vector3<f64>; 6],
    /// Joint axes, unit vectors.
    pub axes: [Vector3<f64>; N_JOINTS],
    /// Link bodies with ports `prox` (at `J_k`) and `dist` (at `J_{k+1}`).
    pub links: Vec<RigidBodyData>,
}

impl ArmGeometry {
    /// Printed link data, joint offsets at twice the link centres of mass,
    /// axes z, y, y, y, z.
    pub fn table_default() -> Self {
        let offsets = tables::default_joint_offsets();
        ArmGeometry {
            offsets,
            axes: [Vector3::z(), Vector3::y(), Vector3::y(), Vector3::y(), Vector3::z()],
            links: tables::arm_links(&offsets),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.links.len() != 6 {
            return Err(Error::Config(alloc::format!("{} links, expected 6", self.links.len())));
        }
        for (k, a) in self.axes.iter().enumerate() {
            if (a.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::Config(alloc::format!("joint {} axis is not unit", k + 1)));
            }
        }
        if self.offsets.iter().any(|o| o.iter().any(|x| !x.is_finite())) {
            return Err(Error::Config("non-finite joint offset".into()));
        }
        for l in &self.links {
            l.port("prox")?;
            l.port("dist")?;
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.links.iter().map(|l| l.mass).sum()
    }

    /// Sum of offset lengths: an upper bound on the base-to-tip distance.
    pub fn span(&self) -> f64 {
        self.offsets.iter().map(|o| o.norm()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointVector(pub [f64; N_JOINTS]);

impl JointVector {
    pub fn new(a: [f64; N_JOINTS]) -> Result<Self> {
        let q = JointVector(a);
        q.check()?;
        Ok(q)
    }

    pub fn zero() -> Self {
        JointVector([0.0; N_JOINTS])
    }

    pub fn check(&self) -> Result<()> {
        for (k, a) in self.0.iter().enumerate() {
            if !a.is_finite() || a.abs() > 2.0 * PI {
                return Err(Error::JointOutOfRange { joint: k + 1, alpha: *a });
            }
        }
        Ok(())
    }
}

/// Rotation `P_{l_k/l_0}` and origin `J_k` (in `l_0`) of every link frame,
/// plus the tip `J_6` carried by link 5.
#[derive(Clone, Debug, PartialEq)]
pub struct ArmFrames {
    pub origins: [Vector3<f64>; 7],
    pub rotations: [Matrix3<f64>; 6],
}

pub fn arm_frames(geom: &ArmGeometry, q: &JointVector) -> Result<ArmFrames> {
    q.check()?;
    let mut origins = [Vector3::zeros(); 7];
    let mut rotations = [Matrix3::identity(); 6];
    for k in 0..6 {
        if k > 0 {
            rotations[k] = rotations[k - 1] * Dcm::about_axis(&geom.axes[k - 1], q.0[k - 1])?.matrix();
        }
        origins[k + 1] = origins[k] + rotations[k] * geom.offsets[k];
    }
    Ok(ArmFrames { origins, rotations })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

/// Pose of `J_6` (frame `l_5`) relative to `J_0` (frame `l_0`).
pub fn forward_kinematics(geom: &ArmGeometry, q: &JointVector) -> Result<Pose> {
    let f = arm_frames(geom, q)?;
    Ok(Pose {
        position: f.origins[6],
        rotation: f.rotations[5],
    })
}

/// One element of a kinematic chain, applied left to right:
/// `Fixed` moves by `offset` in the current frame then rotates by `rot`;
/// `Joint` rotates about `axis` by `sign * q[index]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChainStep {
    Fixed { offset: Vector3<f64>, rot: Matrix3<f64> },
    Joint { axis: Vector3<f64>, sign: f64, index: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub steps: Vec<ChainStep>,
    pub n_joints: usize,
}

impl Chain {
    /// Base `J_0` to tip `J_6`, joint indices `first..first+5`.
    pub fn arm(geom: &ArmGeometry, first: usize) -> Chain {
        let mut steps = Vec::new();
        for k in 0..6 {
            if k > 0 {
                steps.push(ChainStep::Joint {
                    axis: geom.axes[k - 1],
                    sign: 1.0,
                    index: first + k - 1,
                });
            }
            steps.push(ChainStep::Fixed {
                offset: geom.offsets[k],
                rot: Matrix3::identity(),
            });
        }
        Chain {
            steps,
            n_joints: first + N_JOINTS,
        }
    }

    /// Tip `J_6` back to base `J_0`.
    pub fn arm_reversed(geom: &ArmGeometry, first: usize) -> Chain {
        let mut steps = Vec::new();
        for k in (0..6).rev() {
            steps.push(ChainStep::Fixed {
                offset: -geom.offsets[k],
                rot: Matrix3::identity(),
            });
            if k > 0 {
                steps.push(ChainStep::Joint {
                    axis: geom.axes[k - 1],
                    sign: -1.0,
                    index: first + k - 1,
                });
            }
        }
        Chain {
            steps,
            n_joints: first + N_JOINTS,
        }
    }

    pub fn then(mut self, other: Chain) -> Chain {
        self.n_joints = self.n_joints.max(other.n_joints);
        self.steps.extend(other.steps);
        self
    }

    pub fn fixed(mut self, offset: Vector3<f64>, rot: Matrix3<f64>) -> Chain {
        self.steps.push(ChainStep::Fixed { offset, rot });
        self
    }

    pub fn pose(&self, q: &[f64]) -> Pose {
        let mut p = Vector3::zeros();
        let mut r = Matrix3::identity();
        for s in &self.steps {
            match s {
                ChainStep::Fixed { offset, rot } => {
                    p += r * offset;
                    r *= rot;
                }
                ChainStep::Joint { axis, sign, index } => {
                    r *= rodrigues(axis, sign * q[*index]);
                }
            }
        }
        Pose { position: p, rotation: r }
    }
}

fn rodrigues(k: &Vector3<f64>, a: f64) -> Matrix3<f64> {
    let s = crate::linalg::skew(k);
    Matrix3::identity() + s * a.sin() + s * s * (1.0 - a.cos())
}

fn wrap(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI
    } else if x < -PI {
        x += 2.0 * PI
    }
    x
}

/// Tolerances of the five-dof task: tip position and tool axis.
pub const IK_POS_TOL: f64 = 1e-4;
pub const IK_AXIS_TOL: f64 = 1e-3;
const IK_RESTARTS: usize = 24;

#[derive(Clone, Copy, Debug)]
enum Target {
    /// Tool `z` axis only.
    Axis(Vector3<f64>),
    /// Full tip orientation.
    Frame(Matrix3<f64>),
}

fn task_error(chain: &Chain, q: &[f64], pos: &Vector3<f64>, target: &Target) -> ([f64; 6], f64, f64) {
    let p = chain.pose(q);
    let dp = pos - p.position;
    let (da, ang) = match target {
        Target::Axis(axis) => {
            let z = p.rotation.column(2).into_owned();
            (axis - z, z.cross(axis).norm().atan2(z.dot(axis)))
        }
        Target::Frame(rot) => {
            let mut v = Vector3::zeros();
            for i in 0..3 {
                v += p.rotation.column(i).cross(&rot.column(i));
            }
            let c = ((p.rotation.transpose() * rot).trace() - 1.0) * 0.5;
            (v * 0.5, (0.5 * v.norm()).atan2(c))
        }
    };
    let e = [dp.x, dp.y, dp.z, da.x, da.y, da.z];
    (e, dp.norm(), ang)
}

/// Damped least squares on tip position plus tool axis or frame from one seed.
fn dls(chain: &Chain, pos: &Vector3<f64>, target: &Target, seed: &[f64]) -> (Vec<f64>, f64, f64) {
    let n = chain.n_joints;
    let mut q = seed.to_vec();
    let (mut e, mut ep, mut ea) = task_error(chain, &q, pos, target);
    let mut lambda = 1e-2;
    for _ in 0..500 {
        if ep < 1e-12 && ea < 1e-12 {
            break;
        }
        let h = 1e-7;
        let mut jac = Mat::zeros(6, n);
        for j in 0..n {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[j] += h;
            qm[j] -= h;
            let (ep_, _, _) = task_error(chain, &qp, pos, target);
            let (em_, _, _) = task_error(chain, &qm, pos, target);
            for r in 0..6 {
                // d(error)/dq = -d(pose)/dq
                jac[(r, j)] = -(ep_[r] - em_[r]) / (2.0 * h);
            }
        }
        let ev = Mat::from_column_slice(6, 1, &e);
        let mut improved = false;
        for _ in 0..12 {
            let jjt = &jac * jac.transpose() + Mat::identity(6, 6) * (lambda * lambda);
            let step = match jjt.lu().solve(&ev) {
                Some(s) => jac.transpose() * s,
                None => break,
            };
            let cand: Vec<f64> = q.iter().zip(step.iter()).map(|(a, d)| wrap(a + d)).collect();
            let (ce, cp, ca) = task_error(chain, &cand, pos, target);
            let old = ep * ep + ea * ea;
            if cp * cp + ca * ca < old {
                q = cand;
                e = ce;
                ep = cp;
                ea = ca;
                lambda = (lambda * 0.3).max(1e-9);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (q, ep, ea)
}

fn solve_restarts(chain: &Chain, pos: &Vector3<f64>, target: &Target, seed: &[f64]) -> Result<Vec<f64>> {
    let n = chain.n_joints;
    let mut best = (f64::INFINITY, f64::INFINITY);
    for attempt in 0..IK_RESTARTS {
        let start: Vec<f64> = (0..n)
            .map(|j| {
                if attempt == 0 {
                    seed[j]
                } else {
                    // fixed quasi-random offsets, golden-ratio sequence
                    let u = ((attempt * n + j) as f64 * 0.618_033_988_75).fract();
                    let spread = PI * (attempt as f64 / 8.0).min(1.0);
                    wrap(seed[j] + (2.0 * u - 1.0) * spread)
                }
            })
            .collect();
        let (q, ep, ea) = dls(chain, pos, target, &start);
        if ep < IK_POS_TOL && ea < IK_AXIS_TOL {
            return Ok(q);
        }
        if ep + ea < best.0 + best.1 {
            best = (ep, ea);
        }
    }
    Err(Error::IkNotConverged {
        pos_err: best.0,
        axis_err: best.1,
    })
}

fn bad_target(pos: &Vector3<f64>) -> bool {
    pos.iter().any(|x| !x.is_finite())
}

/// Inverse kinematics of a general chain: deterministic restarts around the
/// seed, first converged solution wins.
pub fn chain_ik(chain: &Chain, pos: &Vector3<f64>, axis: &Vector3<f64>, seed: &[f64]) -> Result<Vec<f64>> {
    if bad_target(pos) || axis.iter().any(|x| !x.is_finite()) || axis.norm() < 1e-12 {
        return Err(Error::IkNotConverged {
            pos_err: f64::INFINITY,
            axis_err: f64::INFINITY,
        });
    }
    solve_restarts(chain, pos, &Target::Axis(axis.normalize()), seed)
}

/// Like [`chain_ik`] but matches the full tip orientation; needs at least six
/// joints. The angle tolerance is [`IK_AXIS_TOL`].
pub fn chain_ik_frame(chain: &Chain, pos: &Vector3<f64>, rot: &Matrix3<f64>, seed: &[f64]) -> Result<Vec<f64>> {
    if bad_target(pos) || rot.iter().any(|x| !x.is_finite()) {
        return Err(Error::IkNotConverged {
            pos_err: f64::INFINITY,
            axis_err: f64::INFINITY,
        });
    }
    solve_restarts(chain, pos, &Target::Frame(*rot), seed)
}

/// Single-arm inverse kinematics for the tip `J_6`: position and tool axis
/// (`z` of `l_5`), both in `l_0`.
pub fn inverse_kinematics(
    geom: &ArmGeometry,
    target: &Vector3<f64>,
    axis: &Vector3<f64>,
    seed: &JointVector,
) -> Result<JointVector> {
    let chain = Chain::arm(geom, 0);
    let q = chain_ik(&chain, target, axis, &seed.0)?;
    JointVector::new([q[0], q[1], q[2], q[3], q[4]])
}

/// Static two-port of one arm.
///
/// Direct: inputs `xdd_J0` (frame `l_0`), `W_J6` (wrench on the arm, frame
/// `l_5`); outputs `W_J0` (wrench on the parent), `xdd_J6`.
/// Inverted: inputs `xdd_J6`, `W_J0`; outputs `W_J6`, `xdd_J0`.
pub fn arm_two_port(geom: &ArmGeometry, q: &JointVector, inverted: bool) -> Result<StateSpace> {
    q.check()?;
    geom.validate()?;
    let direct = arm_direct(geom, q)?;
    if !inverted {
        return Ok(direct);
    }
    let (inv, _) = invert_channels(&direct, &["xdd_J0", "W_J6"], &["W_J0", "xdd_J6"])?;
    // the swapped wrench channels change meaning (on-body <-> on-parent)
    let neg = -Mat::identity(6, 6);
    let inv = inv.transform_output("W_J6", &neg)?.transform_input("W_J0", &neg)?;
    inv.select(&["xdd_J6", "W_J0"], &["W_J6", "xdd_J0"])
}

fn arm_direct(geom: &ArmGeometry, q: &JointVector) -> Result<StateSpace> {
    let mut net = Network::new();
    let mut ids = Vec::new();
    for link in &geom.links {
        ids.push(net.add(&link.name, rigid_nport_inverted(link, "prox", &["dist"])?));
    }
    for k in 0..5 {
        let r = frame6(Dcm::about_axis(&geom.axes[k], q.0[k])?.matrix());
        // twist at J_{k+1}: l_k -> l_{k+1}; wrench of link k+1 on link k: l_{k+1} -> l_k
        net.connect_gain(ids[k], "xdd_dist", ids[k + 1], "xdd_prox", r.transpose());
        net.connect_gain(ids[k + 1], "W_prox", ids[k], "W_dist", r);
    }
    net.input("xdd_J0", 6, &[(ids[0], "xdd_prox", None)]);
    net.input("W_J6", 6, &[(ids[5], "W_dist", None)]);
    net.output("W_J0", ids[0], "W_prox", None);
    net.output("xdd_J6", ids[5], "xdd_dist", None);
    net.build()
}

/// Spatial mass matrix of the arm about `J_0`, frame `l_0`, from the link
/// placements.
pub fn arm_spatial_mass(geom: &ArmGeometry, q: &JointVector) -> Result<nalgebra::Matrix6<f64>> {
    let f = arm_frames(geom, q)?;
    let mut m = nalgebra::Matrix6::zeros();
    for (k, link) in geom.links.iter().enumerate() {
        let r = f.rotations[k];
        let g = f.origins[k] - r * link.port("prox")?;
        m += crate::multibody::spatial_mass_at(
            link.mass,
            &g,
            &crate::multibody::parallel_axis(&(r * link.inertia_g * r.transpose()), link.mass, &g),
        );
    }
    Ok(m)
}

/// `s(t) = 10 t^3 - 15 t^4 + 6 t^5`.
pub fn quintic(t: f64) -> f64 {
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

pub fn quintic_rate(t: f64) -> f64 {
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

pub fn quintic_accel(t: f64) -> f64 {
    60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuinticTrajectory {
    pub q0: JointVector,
    pub q1: JointVector,
}

impl QuinticTrajectory {
    pub fn at(&self, t: f64) -> JointVector {
        let s = quintic(t.clamp(0.0, 1.0));
        JointVector(core::array::from_fn(|k| self.q0.0[k] + s * (self.q1.0[k] - self.q0.0[k])))
    }
}

/// `z` waypoints at `t = k / (z - 1)`.
pub fn quintic_waypoints(q0: &JointVector, q1: &JointVector, z: usize) -> Result<Vec<JointVector>> {
    if z < 2 {
        return Err(Error::Config(alloc::format!("{z} waypoints, at least 2 needed")));
    }
    q0.check()?;
    q1.check()?;
    let tr = QuinticTrajectory { q0: *q0, q1: *q1 };
    Ok((0..z)
        .map(|k| {
            if k == 0 {
                *q0
            } else if k == z - 1 {
                *q1
            } else {
                tr.at(k as f64 / (z - 1) as f64)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multibody::{rigid_nport_inverted, tau};

    fn geom() -> ArmGeometry {
        ArmGeometry::table_default()
    }

    #[test]
    fn fk_home_is_sum_of_offsets() {
        let g = geom();
        let p = forward_kinematics(&g, &JointVector::zero()).unwrap();
        let s: Vector3<f64> = g.offsets.iter().sum();
        assert!((p.position - s).norm() < 1e-15);
        assert_eq!(p.rotation, Matrix3::identity());
    }

    #[test]
    fn single_joint_quarter_turn() {
        // a quarter turn about z sends a unit x offset to y; half a turn sends it to -x
        let mut g = geom();
        g.offsets = [Vector3::zeros(); 6];
        g.offsets[1] = Vector3::x();
        let mut q = JointVector::zero();
        q.0[0] = PI / 2.0;
        let p = forward_kinematics(&g, &q).unwrap();
        assert!((p.position - Vector3::y()).norm() < 1e-15);
        q.0[0] = PI;
        let p = forward_kinematics(&g, &q).unwrap();
        assert!((p.position + Vector3::x()).norm() < 1e-15);
    }

    #[test]
    fn out_of_range_joint() {
        assert_eq!(
            JointVector::new([0.0, 7.0, 0.0, 0.0, 0.0]),
            Err(Error::JointOutOfRange { joint: 2, alpha: 7.0 })
        );
    }

    #[test]
    fn ik_fixed_point_and_round_trip() {
        let g = geom();
        let home = forward_kinematics(&g, &JointVector::zero()).unwrap();
        let z = home.rotation.column(2).into_owned();
        let q = inverse_kinematics(&g, &home.position, &z, &JointVector::zero()).unwrap();
        assert_eq!(q, JointVector::zero());

        let qt = JointVector::new([0.4, -0.3, 0.8, 0.2, -0.5]).unwrap();
        let t = forward_kinematics(&g, &qt).unwrap();
        let z = t.rotation.column(2).into_owned();
        let q = inverse_kinematics(&g, &t.position, &z, &JointVector::zero()).unwrap();
        let back = forward_kinematics(&g, &q).unwrap();
        assert!((back.position - t.position).norm() < 1e-6);
    }

    #[test]
    fn ik_unreachable() {
        let g = geom();
        let far = Vector3::new(5.0, 0.0, 0.0);
        assert!(matches!(
            inverse_kinematics(&g, &far, &Vector3::z(), &JointVector::zero()),
            Err(Error::IkNotConverged { .. })
        ));
    }

    #[test]
    fn reversed_chain_returns_to_base() {
        let g = geom();
        let q = [0.3, -0.2, 0.5, 0.1, 0.7];
        let fwd = Chain::arm(&g, 0);
        let tip = fwd.pose(&q);
        let back = Chain::arm_reversed(&g, 0).pose(&q);
        // reversed chain starting in l5 at J6 ends at J0 in l0
        let base_in_l5 = tip.rotation.transpose() * (-tip.position);
        assert!((back.position - base_in_l5).norm() < 1e-14);
        assert!((back.rotation - tip.rotation.transpose()).amax() < 1e-14);
    }

    #[test]
    fn arm_mass_seen_from_base() {
        let g = geom();
        let q = JointVector::new([0.2, 0.4, -0.6, 0.3, 1.0]).unwrap();
        let sys = arm_two_port(&g, &q, false).unwrap();
        let m = -sys.d().view((0, 0), (6, 6)).into_owned();
        assert!((m[(0, 0)] - 40.0).abs() < 1e-12);
        let oracle = arm_spatial_mass(&g, &q).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((m[(i, j)] - oracle[(i, j)]).abs() < 1e-12, "{i},{j}");
            }
        }
    }

    #[test]
    fn massless_chain_reduces_to_base_link() {
        let mut g = geom();
        for l in g.links.iter_mut().skip(1) {
            l.mass = 0.0;
            l.inertia_g = Matrix3::zeros();
        }
        let q = JointVector::new([0.3, 0.1, -0.4, 0.9, 0.2]).unwrap();
        let sys = arm_two_port(&g, &q, false).unwrap();
        let tip = forward_kinematics(&g, &q).unwrap();
        let base = g.links[0].clone().with_port("tip", tip.position + g.links[0].port("prox").unwrap());
        let oracle = rigid_nport_inverted(&base, "prox", &["tip"]).unwrap();
        let r = frame6(&tip.rotation);
        // W_J0 on xdd_J0
        let d = sys.d();
        let o = oracle.d();
        assert!((d.view((0, 0), (6, 6)) - o.view((0, 0), (6, 6))).amax() < 1e-12);
        // xdd_J6 (l5 frame) on xdd_J0
        let x = r.transpose() * o.view((6, 0), (6, 6));
        assert!((d.view((6, 0), (6, 6)) - x).amax() < 1e-12);
        let _ = tau(&Vector3::zeros());
    }

    #[test]
    fn flipped_axis_symmetry() {
        let g = geom();
        let mut h = g.clone();
        h.axes[2] = -h.axes[2];
        let q = JointVector::new([0.3, 0.1, -0.4, 0.9, 0.2]).unwrap();
        let mut qn = q;
        qn.0[2] = -qn.0[2];
        let a = arm_two_port(&g, &q, false).unwrap();
        let b = arm_two_port(&h, &qn, false).unwrap();
        assert!((a.d() - b.d()).amax() < 1e-12);
    }

    #[test]
    fn inverted_arm_matches_reverse_chain() {
        let g = geom();
        let q = JointVector::new([0.5, -0.2, 0.3, -0.7, 0.4]).unwrap();
        let inv = arm_two_port(&g, &q, true).unwrap();
        // oracle: wrench at J6 needed to give the arm tip twist x6 when J0 is free:
        // the free arm is a rigid body driven at J6
        let f = arm_frames(&g, &q).unwrap();
        let m0 = arm_spatial_mass(&g, &q).unwrap();
        // transport to J6 and express in l5
        let t = tau(&f.origins[6]);
        let r = frame6(&f.rotations[5]);
        let m6 = r.transpose() * crate::multibody::dyn6(&(t.transpose() * m0 * t)) * &r;
        let w6_x6 = inv.d().view((0, 0), (6, 6)).into_owned();
        assert!((&w6_x6 + &m6).amax() < 1e-10, "{w6_x6} {m6}");
    }

    #[test]
    fn quintic_profile() {
        assert_eq!(quintic(0.5), 0.5);
        assert_eq!(quintic(0.0), 0.0);
        assert_eq!(quintic(1.0), 1.0);
        let h = 1e-5;
        for t in [0.0, 1.0] {
            let d = (quintic(t + h) - quintic(t - h)) / (2.0 * h);
            let dd = (quintic(t + h) - 2.0 * quintic(t) + quintic(t - h)) / (h * h);
            assert!(d.abs() < 1e-8 && quintic_rate(t) == 0.0);
            assert!(dd.abs() < 1e-4 && quintic_accel(t) == 0.0);
        }
        let q0 = JointVector::zero();
        let q1 = JointVector::new([1.0, -1.0, 0.5, 2.0, 0.0]).unwrap();
        let w = quintic_waypoints(&q0, &q1, 7).unwrap();
        assert_eq!(w.len(), 7);
        assert_eq!(w[0], q0);
        assert_eq!(w[6], q1);
        assert!(quintic_waypoints(&q0, &q1, 1).is_err());
    }
}
