//! Building blocks for linear multibody models: kinematic transport, flexible
//! two-port bodies, rigid n-port bodies, frame changes and the modal-frequency
//! uncertainty representation.
//!
//! Conventions: a wrench is `[F; T]`, an acceleration twist is `[a; w_dot]`.
//! Body inputs carry wrenches applied *on* the body; wrench outputs carry the
//! wrench the body applies *on its parent* at the parent port.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix3, Matrix6, SymmetricEigen, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{width, Error, Result};
use crate::linalg::{frame6, skew, Mat};
use crate::linss::{channels, invert_channels, Channel, StateSpace};

/// `tau_PB = [[I, skew(PB)], [0, I]]` maps the acceleration twist at `B` to
/// the one at `P` on the same rigid body; its transpose maps a wrench at `P`
/// to the equivalent wrench at `B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicTransport {
    pub pb: Vector3<f64>,
    pub tau: Matrix6<f64>,
}

pub fn tau_kinematic(pb: &Vector3<f64>) -> KinematicTransport {
    KinematicTransport {
        pb: *pb,
        tau: tau(pb),
    }
}

pub fn tau(pb: &Vector3<f64>) -> Matrix6<f64> {
    let mut t = Matrix6::identity();
    t.fixed_view_mut::<3, 3>(0, 3).copy_from(&skew(pb));
    t
}

pub fn tau_dyn(pb: &Vector3<f64>) -> Mat {
    Mat::from_fn(6, 6, |i, j| tau(pb)[(i, j)])
}

pub(crate) fn dyn6(m: &Matrix6<f64>) -> Mat {
    Mat::from_fn(6, 6, |i, j| m[(i, j)])
}

/// Spatial mass matrix at a point `P` of a body of mass `m` whose centre of
/// mass sits at `PG` and whose inertia about `P` is `j_p`.
pub fn spatial_mass_at(m: f64, pg: &Vector3<f64>, j_p: &Matrix3<f64>) -> Matrix6<f64> {
    let s = skew(pg);
    let mut d = Matrix6::zeros();
    d.fixed_view_mut::<3, 3>(0, 0).copy_from(&(Matrix3::identity() * m));
    d.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-s * m));
    d.fixed_view_mut::<3, 3>(3, 0).copy_from(&(s * m));
    d.fixed_view_mut::<3, 3>(3, 3).copy_from(j_p);
    d
}

/// Parallel-axis shift of an inertia tensor from the centre of mass to a
/// point at `GP` from it.
pub fn parallel_axis(j_g: &Matrix3<f64>, m: f64, gp: &Vector3<f64>) -> Matrix3<f64> {
    j_g + (Matrix3::identity() * gp.norm_squared() - gp * gp.transpose()) * m
}

fn symmetric_pd(m: &Matrix3<f64>, tol: f64) -> bool {
    if (m - m.transpose()).amax() > 1e-9 * m.amax().max(1.0) {
        return false;
    }
    let e = SymmetricEigen::new(*m);
    e.eigenvalues.iter().all(|l| *l > tol)
}

/// Checks that a 3x3 inertia tensor is symmetric positive definite and that
/// its principal moments satisfy the triangle inequality.
pub fn check_inertia(j: &Matrix3<f64>) -> core::result::Result<(), String> {
    if (j - j.transpose()).amax() > 1e-9 * j.amax().max(1.0) {
        return Err("inertia is not symmetric".into());
    }
    let e = SymmetricEigen::new(*j).eigenvalues;
    if e.iter().any(|l| *l <= 0.0) {
        return Err(alloc::format!("inertia is not positive definite (eigenvalues {:?})", e.as_slice()));
    }
    let s = e[0] + e[1] + e[2];
    for k in 0..3 {
        if e[k] > s - e[k] + 1e-9 * s {
            return Err(alloc::format!("principal moments {:?} violate the triangle inequality", e.as_slice()));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidBodyData {
    pub name: String,
    pub mass: f64,
    /// Inertia about the centre of mass `G`, body frame.
    pub inertia_g: Matrix3<f64>,
    /// Named port offsets `GP_k` in the body frame.
    pub ports: Vec<(String, Vector3<f64>)>,
}

impl RigidBodyData {
    pub fn new(name: &str, mass: f64, inertia_g: Matrix3<f64>) -> Self {
        RigidBodyData {
            name: name.to_string(),
            mass,
            inertia_g,
            ports: Vec::new(),
        }
    }

    pub fn with_port(mut self, name: &str, gp: Vector3<f64>) -> Self {
        self.ports.push((name.to_string(), gp));
        self
    }

    pub fn port(&self, name: &str) -> Result<Vector3<f64>> {
        if name == "G" {
            return Ok(Vector3::zeros());
        }
        self.ports
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::UnknownPort(alloc::format!("{}.{}", self.name, name)))
    }

    pub fn spatial_mass(&self) -> Matrix6<f64> {
        spatial_mass_at(self.mass, &Vector3::zeros(), &self.inertia_g)
    }

    /// Spatial mass matrix about port `p` (or `G`).
    pub fn spatial_mass_at(&self, p: &str) -> Result<Matrix6<f64>> {
        let gp = self.port(p)?;
        let t = tau(&(-gp));
        Ok(t.transpose() * self.spatial_mass() * t)
    }

    pub fn validate(&self) -> core::result::Result<(), String> {
        if !(self.mass > 0.0) {
            return Err(alloc::format!("{}: mass must be positive", self.name));
        }
        check_inertia(&self.inertia_g).map_err(|e| alloc::format!("{}: {e}", self.name))
    }
}

fn unique_ports<'a>(names: &[&'a str]) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for n in names {
        if *n != "G" && !out.contains(n) {
            out.push(n);
        }
    }
    out
}

/// Free rigid body seen from its ports: wrenches `W_<port>` applied on the
/// body (plus `W_G`) map to acceleration twists `xdd_<port>` (plus `xdd_G`).
pub fn rigid_nport(body: &RigidBodyData, ports: &[&str]) -> Result<StateSpace> {
    let ports = unique_ports(ports);
    let mut offsets = Vec::new();
    for p in &ports {
        offsets.push(body.port(p)?);
    }
    offsets.push(Vector3::zeros());
    let k = offsets.len();
    if !(body.mass > 0.0) || !symmetric_pd(&body.inertia_g, 0.0) {
        return Err(Error::SingularInertia(body.name.clone()));
    }
    let dg_inv = body
        .spatial_mass()
        .try_inverse()
        .ok_or_else(|| Error::SingularInertia(body.name.clone()))?;
    let mut t = Mat::zeros(6 * k, 6);
    for (i, gp) in offsets.iter().enumerate() {
        // tau_{P G}: vector from P to G is -GP
        t.view_mut((6 * i, 0), (6, 6)).copy_from(&tau_dyn(&(-gp)));
    }
    let x = &t * dyn6(&dg_inv) * t.transpose();
    let mut ins: Vec<Channel> = ports.iter().map(|p| Channel::new(&alloc::format!("W_{p}"), 6)).collect();
    ins.push(Channel::new("W_G", 6));
    let mut outs: Vec<Channel> = ports.iter().map(|p| Channel::new(&alloc::format!("xdd_{p}"), 6)).collect();
    outs.push(Channel::new("xdd_G", 6));
    StateSpace::gain(x, ins, outs)
}

/// Rigid body whose first port is driven in acceleration by its parent.
///
/// Inputs: `xdd_<p1>`, `W_<other>`..., `W_G`; outputs: `W_<p1>` (wrench the
/// body applies on its parent), `xdd_<other>`..., `xdd_G`. No inertia
/// inversion is needed, so massless bodies are accepted.
pub fn rigid_nport_inverted(body: &RigidBodyData, inverted: &str, others: &[&str]) -> Result<StateSpace> {
    let gp1 = body.port(inverted)?;
    let others: Vec<&str> = unique_ports(others).into_iter().filter(|p| *p != inverted).collect();
    let mut offs = Vec::new();
    for p in &others {
        offs.push(body.port(p)?);
    }
    offs.push(Vector3::zeros());
    let k = offs.len();
    let t_g1 = tau(&gp1); // xdd_G = tau_{G P1} xdd_P1
    let dg = body.spatial_mass();
    let mut d = Mat::zeros(6 * (k + 1), 6 * (k + 1));
    d.view_mut((0, 0), (6, 6))
        .copy_from(&dyn6(&(-(t_g1.transpose() * dg * t_g1))));
    for (i, gp) in offs.iter().enumerate() {
        let t_pg = tau(&(-gp));
        // W_P1 += tau_{G P1}^T tau_{P G}^T W_P
        d.view_mut((0, 6 * (i + 1)), (6, 6))
            .copy_from(&dyn6(&(t_g1.transpose() * t_pg.transpose())));
        // xdd_P = tau_{P G} tau_{G P1} xdd_P1
        d.view_mut((6 * (i + 1), 0), (6, 6))
            .copy_from(&dyn6(&(t_pg * t_g1)));
    }
    let mut ins = alloc::vec![Channel::new(&alloc::format!("xdd_{inverted}"), 6)];
    let mut outs = alloc::vec![Channel::new(&alloc::format!("W_{inverted}"), 6)];
    for p in &others {
        ins.push(Channel::new(&alloc::format!("W_{p}"), 6));
        outs.push(Channel::new(&alloc::format!("xdd_{p}"), 6));
    }
    ins.push(Channel::new("W_G", 6));
    outs.push(Channel::new("xdd_G", 6));
    StateSpace::gain(d, ins, outs)
}

/// Inverted rigid model obtained by channel inversion of [`rigid_nport`]; the
/// wrench output is negated so that it reports the action on the parent.
pub fn rigid_nport_inverted_via_inversion(body: &RigidBodyData, inverted: &str, others: &[&str]) -> Result<StateSpace> {
    let mut ports = alloc::vec![inverted];
    ports.extend(others.iter().copied().filter(|p| *p != inverted && *p != "G"));
    let x = rigid_nport(body, &ports)?;
    let (inv, _) = invert_channels(
        &x,
        &[&alloc::format!("W_{inverted}")],
        &[&alloc::format!("xdd_{inverted}")],
    )?;
    let neg = -Mat::identity(6, 6);
    inv.transform_output(&alloc::format!("W_{inverted}"), &neg)
}

/// Flexible body cantilevered at `P` with a child port `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModalBodyData {
    pub name: String,
    pub mass: f64,
    /// Inertia about `P`, body frame.
    pub inertia_p: Matrix3<f64>,
    /// Centre of mass relative to `P`.
    pub com: Vector3<f64>,
    /// Clamped-free angular frequencies (rad/s).
    pub freqs: Vec<f64>,
    pub damping: Vec<f64>,
    /// Modal participation factors, `n x 6`.
    pub l_p: Mat,
    /// Mode shapes at `C`, `6 x n`.
    pub phi_c: Mat,
    /// Child port offset `PC`.
    pub pc: Vector3<f64>,
}

impl ModalBodyData {
    pub fn n_modes(&self) -> usize {
        self.freqs.len()
    }

    /// Static direct model `D_P`.
    pub fn d_p(&self) -> Matrix6<f64> {
        spatial_mass_at(self.mass, &self.com, &self.inertia_p)
    }

    /// Residual mass `D_P - L_P^T L_P`.
    pub fn residual_mass(&self) -> Mat {
        dyn6(&self.d_p()) - self.l_p.transpose() * &self.l_p
    }

    /// Hard invariants raise `InvalidModalData`; residual-mass indefiniteness
    /// is returned as a warning.
    pub fn validate(&self) -> Result<Vec<String>> {
        let n = self.freqs.len();
        let bad = |m: String| Err(Error::InvalidModalData(alloc::format!("{}: {m}", self.name)));
        if self.damping.len() != n {
            return bad(alloc::format!("{} frequencies but {} dampings", n, self.damping.len()));
        }
        if self.l_p.nrows() != n || self.l_p.ncols() != 6 {
            return bad(alloc::format!("L_P is {}x{}, expected {n}x6", self.l_p.nrows(), self.l_p.ncols()));
        }
        if self.phi_c.nrows() != 6 || self.phi_c.ncols() != n {
            return bad(alloc::format!("Phi_C is {}x{}, expected 6x{n}", self.phi_c.nrows(), self.phi_c.ncols()));
        }
        if let Some(w) = self.freqs.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return bad(alloc::format!("frequency {w} must be positive"));
        }
        if let Some(x) = self.damping.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
            return bad(alloc::format!("damping {x} must lie in (0, 1)"));
        }
        if !(self.mass > 0.0) {
            return bad("mass must be positive".into());
        }
        let dp = self.d_p();
        let e = SymmetricEigen::new(dp).eigenvalues;
        if e.iter().any(|l| *l <= 0.0) {
            return bad("static model D_P is not positive definite".into());
        }
        let mut warnings = Vec::new();
        let r = self.residual_mass();
        let re = SymmetricEigen::new(Matrix6::from_fn(|i, j| 0.5 * (r[(i, j)] + r[(j, i)]))).eigenvalues;
        let lmin = re.iter().cloned().fold(f64::INFINITY, f64::min);
        if lmin <= 0.0 {
            warnings.push(alloc::format!(
                "{}: residual mass is not positive definite (smallest eigenvalue {lmin:.4e})",
                self.name
            ));
        }
        Ok(warnings)
    }
}

/// Two-input two-output model of a flexible body.
///
/// Inputs `W_C` (wrench on the body at `C`) and `xdd_P`; outputs `xdd_C` and
/// `W_P` (wrench on the parent at `P`). States are `[eta; eta_dot]`.
pub fn titop_two_port(data: &ModalBodyData) -> Result<StateSpace> {
    data.validate()?;
    let n = data.n_modes();
    let om2 = Mat::from_fn(n, n, |i, j| if i == j { data.freqs[i] * data.freqs[i] } else { 0.0 });
    let zom = Mat::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * data.damping[i] * data.freqs[i]
        } else {
            0.0
        }
    });
    let phi = &data.phi_c;
    let l = &data.l_p;
    let t_cp = tau_dyn(&(-data.pc));

    let mut a = Mat::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).copy_from(&Mat::identity(n, n));
    a.view_mut((n, 0), (n, n)).copy_from(&(-&om2));
    a.view_mut((n, n), (n, n)).copy_from(&(-&zom));

    let mut b = Mat::zeros(2 * n, 12);
    b.view_mut((n, 0), (n, 6)).copy_from(&phi.transpose());
    b.view_mut((n, 6), (n, 6)).copy_from(&(-l));

    let mut c = Mat::zeros(12, 2 * n);
    c.view_mut((0, 0), (6, n)).copy_from(&(-(phi * &om2)));
    c.view_mut((0, n), (6, n)).copy_from(&(-(phi * &zom)));
    c.view_mut((6, 0), (6, n)).copy_from(&(l.transpose() * &om2));
    c.view_mut((6, n), (6, n)).copy_from(&(l.transpose() * &zom));

    let mut d = Mat::zeros(12, 12);
    let d12 = &t_cp - phi * l;
    d.view_mut((0, 0), (6, 6)).copy_from(&(phi * phi.transpose()));
    d.view_mut((0, 6), (6, 6)).copy_from(&d12);
    d.view_mut((6, 0), (6, 6)).copy_from(&d12.transpose());
    d.view_mut((6, 6), (6, 6)).copy_from(&(-dyn6(&data.d_p()) + l.transpose() * l));

    StateSpace::new(
        a,
        b,
        c,
        d,
        channels(&[("W_C", 6), ("xdd_P", 6)]),
        channels(&[("xdd_C", 6), ("W_P", 6)]),
    )
}

/// Two-port model with one mode frequency made uncertain:
/// `omega = omega0 (1 + r delta)` after closing `w_omega = delta z_omega`.
pub fn mode_freq_lfr(data: &ModalBodyData, mode_index: usize, r: f64) -> Result<StateSpace> {
    let n = data.n_modes();
    if mode_index >= n {
        return Err(Error::InvalidMode {
            index: mode_index,
            count: n,
        });
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidBound(r));
    }
    let base = titop_two_port(data)?;
    let j = mode_index;
    let w0 = data.freqs[j];
    let xi = data.damping[j];
    let phi_j = data.phi_c.column(j).into_owned();
    let l_j = data.l_p.row(j).transpose();

    // perturbation force p = w0 w1 + w2 enters the modal acceleration as -p
    let mut b = base.b().clone().insert_columns(12, 2, 0.0);
    b[(n + j, 12)] = -w0;
    b[(n + j, 13)] = -1.0;
    let mut c = base.c().clone().insert_rows(12, 2, 0.0);
    c[(12, j)] = r * w0;
    c[(13, j)] = r * w0 * w0;
    c[(13, n + j)] = 2.0 * xi * r * w0;
    let mut d = base.d().clone().insert_columns(12, 2, 0.0).insert_rows(12, 2, 0.0);
    for i in 0..6 {
        d[(i, 12)] = -phi_j[i] * w0;
        d[(i, 13)] = -phi_j[i];
        d[(6 + i, 12)] = l_j[i] * w0;
        d[(6 + i, 13)] = l_j[i];
    }
    d[(13, 12)] = r * w0;
    StateSpace::new(
        base.a().clone(),
        b,
        c,
        d,
        channels(&[("W_C", 6), ("xdd_P", 6), ("w_omega", 2)]),
        channels(&[("xdd_C", 6), ("W_P", 6), ("z_omega", 2)]),
    )
}

/// Direction cosine matrix mapping child-frame coordinates into the parent
/// frame: `[v]_parent = R [v]_child`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dcm(Matrix3<f64>);

impl Dcm {
    pub fn new(r: Matrix3<f64>) -> Result<Self> {
        if (r.transpose() * r - Matrix3::identity()).amax() > 1e-10 {
            return Err(Error::NotRotation("R^T R differs from identity".into()));
        }
        if (r.determinant() - 1.0).abs() > 1e-10 {
            return Err(Error::NotRotation("determinant differs from +1".into()));
        }
        Ok(Dcm(r))
    }

    /// Accepts matrices printed with a few significant digits (such as
    /// `0.866` for `cos 30`) and re-orthonormalises them.
    pub fn from_rounded(r: Matrix3<f64>, tol: f64) -> Result<Self> {
        if (r.transpose() * r - Matrix3::identity()).amax() > tol || (r.determinant() - 1.0).abs() > tol {
            return Err(Error::NotRotation("matrix too far from a rotation".into()));
        }
        let svd = r.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        Dcm::new(u * vt)
    }

    pub fn identity() -> Self {
        Dcm(Matrix3::identity())
    }

    pub fn about_axis(axis: &Vector3<f64>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let n = axis.norm();
        if !(n > 0.0) {
            return Err(Error::NotRotation("zero rotation axis".into()));
        }
        let k = axis / n;
        let s = skew(&k);
        Ok(Dcm(Matrix3::identity() + s * alpha.sin() + s * s * (1.0 - alpha.cos())))
    }

    pub fn about_x(alpha: f64) -> Result<Self> {
        Dcm::about_axis(&Vector3::x(), alpha)
    }
    pub fn about_y(alpha: f64) -> Result<Self> {
        Dcm::about_axis(&Vector3::y(), alpha)
    }
    pub fn about_z(alpha: f64) -> Result<Self> {
        Dcm::about_axis(&Vector3::z(), alpha)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Dcm {
        Dcm(self.0.transpose())
    }

    pub fn then(&self, child: &Dcm) -> Dcm {
        Dcm(self.0 * child.0)
    }
}

pub fn dcm_axis_x(alpha: f64) -> Result<Dcm> {
    Dcm::about_x(alpha)
}
pub fn dcm_axis_y(alpha: f64) -> Result<Dcm> {
    Dcm::about_y(alpha)
}
pub fn dcm_axis_z(alpha: f64) -> Result<Dcm> {
    Dcm::about_z(alpha)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha.abs() > 2.0 * PI {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    Ok(())
}

/// Tangent-of-quarter-angle parameter; lies in `[-1, 1]` for `|alpha| <= pi`.
pub fn tau_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((alpha / 4.0).tan())
}

/// Re-expresses a width-6 channel in the parent frame of `dcm`: an output
/// becomes `diag(R, R) y`, an input is received as `u_body = diag(R, R)^T u`.
pub fn apply_frame(sys: StateSpace, channel: &str, dcm: &Dcm) -> Result<StateSpace> {
    let p = frame6(dcm.matrix());
    let mut found = false;
    let mut sys = sys;
    if let Ok(r) = sys.output_range(channel) {
        if r.len() != 6 {
            return Err(width(channel, 6, r.len()));
        }
        sys = sys.transform_output(channel, &p)?;
        found = true;
    }
    if let Ok(r) = sys.input_range(channel) {
        if r.len() != 6 {
            return Err(width(channel, 6, r.len()));
        }
        sys = sys.transform_input(channel, &p.transpose())?;
        found = true;
    }
    if !found {
        return Err(Error::UnknownChannel(channel.to_string()));
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn tile() -> RigidBodyData {
        RigidBodyData::new("tile", 6.0423, Matrix3::from_diagonal(&Vector3::new(0.5041, 0.5041, 1.0071)))
    }

    #[test]
    fn transport_examples() {
        assert_eq!(tau(&Vector3::zeros()), Matrix6::identity());
        let t = tau(&Vector3::new(1.0, 0.0, 0.0));
        let blk = t.fixed_view::<3, 3>(0, 3).into_owned();
        assert_eq!(blk, Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0));
        let v = Vector3::new(0.3, -1.2, 2.0);
        assert!((tau(&v) * tau(&(-v)) - Matrix6::identity()).amax() < 1e-15);
        assert!((t.determinant() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rigid_port_examples() {
        let x = rigid_nport(&tile(), &[]).unwrap();
        let mut w = Mat::zeros(6, 1);
        w[0] = 1.0;
        let a = x.d() * w;
        assert!((a[0] - 0.16550).abs() < 5e-6);
        assert!((a[0] - 1.0 / 6.0423).abs() < 1e-15);

        let body = RigidBodyData::new("b", 3.0, Matrix3::from_diagonal(&Vector3::new(1.0, 1.5, 2.0)));
        let x = rigid_nport(&body, &["G"]).unwrap();
        assert_eq!(x.n_inputs(), 6);
        let mut t = Mat::zeros(6, 1);
        t[5] = 1.0;
        assert!(((x.d() * t)[5] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rigid_two_port_formula() {
        let p1 = Vector3::new(0.4, -0.2, 0.1);
        let p2 = Vector3::new(-0.3, 0.5, 0.7);
        let body = RigidBodyData::new("b", 4.0, Matrix3::new(2.0, 0.1, 0.0, 0.1, 3.0, 0.2, 0.0, 0.2, 2.5))
            .with_port("P1", p1)
            .with_port("P2", p2);
        let x = rigid_nport(&body, &["P1", "P2"]).unwrap();
        let expect = tau(&(-p2)) * body.spatial_mass().try_inverse().unwrap() * tau(&(-p1)).transpose();
        let blk = x.d().view((6, 0), (6, 6)).into_owned();
        assert!((blk - dyn6(&expect)).amax() < 1e-14);
        assert!((x.d() - x.d().transpose()).amax() < 1e-14);
    }

    #[test]
    fn inverted_port_matches_inversion() {
        let body = RigidBodyData::new("b", 4.0, Matrix3::new(2.0, 0.1, 0.0, 0.1, 3.0, 0.2, 0.0, 0.2, 2.5))
            .with_port("P1", Vector3::new(0.4, -0.2, 0.1))
            .with_port("P2", Vector3::new(-0.3, 0.5, 0.7));
        let direct = rigid_nport_inverted(&body, "P1", &["P2"]).unwrap();
        let via = rigid_nport_inverted_via_inversion(&body, "P1", &["P2"]).unwrap();
        assert_eq!(direct.inputs(), via.inputs());
        assert_eq!(direct.outputs(), via.outputs());
        assert!((direct.d() - via.d()).amax() < 1e-12);

        let g = rigid_nport_inverted(&body, "G", &[]).unwrap();
        let dg = dyn6(&body.spatial_mass());
        assert!((g.d().view((0, 0), (6, 6)) + &dg).amax() < 1e-15);
    }

    #[test]
    fn massless_inverted_body_is_pure_transport() {
        let body = RigidBodyData::new("empty", 0.0, Matrix3::zeros()).with_port("P", Vector3::new(0.5, 0.0, 0.0));
        let m = rigid_nport_inverted(&body, "P", &[]).unwrap();
        assert!(m.d().view((0, 0), (6, 6)).amax() == 0.0);
        assert!(matches!(rigid_nport(&body, &["P"]), Err(Error::SingularInertia(_))));
    }

    #[test]
    fn dcm_examples() {
        let r = Dcm::about_z(0.0).unwrap();
        assert_eq!(*r.matrix(), Matrix3::identity());
        assert_eq!(tau_alpha(0.0).unwrap(), 0.0);
        let r = Dcm::about_z(PI / 2.0).unwrap();
        let e = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!((r.matrix() - e).amax() < 1e-15);
        assert!((tau_alpha(PI / 2.0).unwrap() - 0.41421356).abs() < 1e-8);
        let c = Dcm::about_z(PI / 3.0).unwrap().then(&Dcm::about_z(-PI / 3.0).unwrap());
        assert!((c.matrix() - Matrix3::identity()).amax() < 1e-15);
        assert!(matches!(Dcm::about_x(7.0), Err(Error::AlphaOutOfRange { .. })));
        assert!((tau_alpha(PI).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frame_examples() {
        let id = StateSpace::gain(Mat::identity(6, 6), channels(&[("W", 6)]), channels(&[("F", 6)])).unwrap();
        let rot = apply_frame(id.clone(), "F", &Dcm::about_z(PI / 2.0).unwrap()).unwrap();
        let mut f = Mat::zeros(6, 1);
        f[0] = 1.0;
        let y = rot.d() * f;
        assert!((y[1] - 1.0).abs() < 1e-15 && y[0].abs() < 1e-15);
        let unchanged = apply_frame(id.clone(), "W", &Dcm::identity()).unwrap();
        assert_eq!(unchanged.d(), id.d());
        let r = Dcm::about_axis(&Vector3::new(1.0, 2.0, -0.5), 1.1).unwrap();
        let back = apply_frame(apply_frame(id.clone(), "W", &r).unwrap(), "W", &r.transpose()).unwrap();
        assert!((back.d() - id.d()).amax() < 1e-12);
        let three = StateSpace::gain(Mat::identity(3, 3), channels(&[("u", 3)]), channels(&[("y", 3)])).unwrap();
        assert!(matches!(apply_frame(three, "u", &r), Err(Error::WidthMismatch { .. })));
    }

    fn toy_modal(n: usize) -> ModalBodyData {
        let l = Mat::from_fn(n, 6, |i, j| 0.3 * ((i + 2 * j) as f64).sin());
        ModalBodyData {
            name: "toy".into(),
            mass: 10.0,
            inertia_p: Matrix3::new(5.0, 0.2, 0.0, 0.2, 6.0, 0.1, 0.0, 0.1, 7.0),
            com: Vector3::new(0.2, 0.1, -0.1),
            freqs: (0..n).map(|i| 2.0 + i as f64).collect(),
            damping: alloc::vec![0.02; n],
            l_p: l,
            phi_c: Mat::from_fn(6, n, |i, j| 0.4 * ((3 * i + j) as f64).cos()),
            pc: Vector3::new(1.0, 0.5, 0.0),
        }
    }

    #[test]
    fn titop_static_case() {
        let data = toy_modal(0);
        let m = titop_two_port(&data).unwrap();
        assert_eq!(m.n_states(), 0);
        let t = tau_dyn(&(-data.pc));
        assert!((m.d().view((0, 6), (6, 6)) - &t).amax() < 1e-15);
        assert!((m.d().view((6, 6), (6, 6)) + dyn6(&data.d_p())).amax() < 1e-15);
        assert!((m.d().view((6, 0), (6, 6)) - t.transpose()).amax() < 1e-15);
    }

    #[test]
    fn titop_structure() {
        let data = toy_modal(3);
        let m = titop_two_port(&data).unwrap();
        assert!((m.d() - m.d().transpose()).amax() < 1e-12);
        // xdd_P -> W_P: DC gain -D_P, high-frequency limit -R_P
        let dc = m.dc_gain().unwrap();
        assert!((dc.view((6, 6), (6, 6)) + dyn6(&data.d_p())).amax() < 1e-12);
        assert!((m.d().view((6, 6), (6, 6)) + data.residual_mass()).amax() < 1e-12);
        // W_C -> xdd_C: zero static gain and compliance Phi diag(1/w^2) Phi^T at low frequency
        assert!(dc.view((0, 0), (6, 6)).amax() < 1e-12);
        let w = 1e-4;
        let g = m.transfer_at(Complex64::new(0.0, w)).unwrap();
        let comp = Mat::from_fn(6, 6, |i, j| {
            (0..3).map(|k| data.phi_c[(i, k)] * data.phi_c[(j, k)] / data.freqs[k].powi(2)).sum::<f64>()
        });
        for i in 0..6 {
            for j in 0..6 {
                let lim = -g[(i, j)].re / (w * w);
                assert!((lim - comp[(i, j)]).abs() < 1e-5 * comp.amax());
            }
        }
        let mut poles = m.poles().unwrap();
        poles.retain(|p| p.im > 0.0);
        poles.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        for (p, (w, x)) in poles.iter().zip(data.freqs.iter().zip(&data.damping)) {
            assert!((p.norm() - w).abs() < 1e-9 * w);
            assert!((-p.re / p.norm() - x).abs() < 1e-9);
        }
    }

    #[test]
    fn lfr_reproduces_shifted_frequency() {
        let data = toy_modal(2);
        let lfr = mode_freq_lfr(&data, 0, 0.2).unwrap();
        for delta in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let closed = crate::linss::lft_upper(&lfr, delta, "w_omega", "z_omega").unwrap();
            let mut shifted = data.clone();
            shifted.freqs[0] *= 1.0 + 0.2 * delta;
            let reference = titop_two_port(&shifted).unwrap();
            for w in [0.1, 1.7, 2.4, 10.0] {
                let s = Complex64::new(0.0, w);
                let e = (closed.transfer_at(s).unwrap() - reference.transfer_at(s).unwrap()).norm();
                assert!(e < 1e-10 * reference.transfer_at(s).unwrap().norm());
            }
        }
        assert!(matches!(mode_freq_lfr(&data, 2, 0.2), Err(Error::InvalidMode { .. })));
        assert!(matches!(mode_freq_lfr(&data, 0, 1.5), Err(Error::InvalidBound(_))));
    }

    #[test]
    fn inertia_checks() {
        assert!(check_inertia(&Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 1.9))).is_ok());
        assert!(check_inertia(&Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 2.5))).is_err());
        assert!(check_inertia(&Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0))).is_err());
    }
}
