//! TOML data files: rigid bodies, flexible (modal) bodies, the robot, and the
//! scenario that ties them together. Body entries of a scenario may be file
//! paths, resolved relative to the scenario file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use flexassembly_core::linalg::Mat;
use flexassembly_core::modal::{calibrate_stiffness, LatticeParams, TileLayout};
use flexassembly_core::multibody::{Dcm, ModalBodyData, RigidBodyData};
use flexassembly_core::robot::{ArmGeometry, N_JOINTS};
use flexassembly_core::scenario::{ScenarioConfig, StructureBank};
use flexassembly_core::tables::{inertia_from_upper, PoiConvention};
use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;

use crate::units::{self, Dim, Quantity, UnitError};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("{context}: {source}")]
    Unit { context: String, source: UnitError },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] flexassembly_core::Error),
}

type Result<T> = std::result::Result<T, ConfigError>;

fn unit<T>(context: &str, r: std::result::Result<T, UnitError>) -> Result<T> {
    r.map_err(|source| ConfigError::Unit {
        context: context.to_string(),
        source,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Products {
    /// Off-diagonals are printed products of inertia `sum m x y`.
    #[default]
    Product,
    Tensor,
}

impl From<Products> for PoiConvention {
    fn from(p: Products) -> Self {
        match p {
            Products::Product => PoiConvention::Product,
            Products::Tensor => PoiConvention::Tensor,
        }
    }
}

fn inertia(ctx: &str, upper: &[Quantity; 6], conv: Products) -> Result<Matrix3<f64>> {
    let mut u = [0.0; 6];
    for (k, q) in upper.iter().enumerate() {
        u[k] = unit(ctx, q.get(Dim::Inertia))?;
    }
    Ok(inertia_from_upper(u, conv.into()))
}

fn matrix3(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

fn dcm(ctx: &str, rows: &[[f64; 3]; 3]) -> Result<Dcm> {
    // printed matrices are rounded to a few digits
    Dcm::from_rounded(matrix3(rows), 2e-3).map_err(|e| ConfigError::Invalid(format!("{ctx}: {e}")))
}

/// Rigid body: mass, inertia about the centre of mass, named ports seen from
/// the centre of mass.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidBodyFile {
    #[serde(default)]
    pub kind: Option<String>,
    pub name: String,
    pub mass: Quantity,
    /// `[xx, xy, xz, yy, yz, zz]`.
    pub inertia: [Quantity; 6],
    #[serde(default)]
    pub products: Products,
    #[serde(default)]
    pub ports: BTreeMap<String, [Quantity; 3]>,
}

impl RigidBodyFile {
    pub fn to_body(&self) -> Result<RigidBodyData> {
        let ctx = format!("body {}", self.name);
        let mut b = RigidBodyData::new(
            &self.name,
            unit(&ctx, self.mass.get(Dim::Mass))?,
            inertia(&ctx, &self.inertia, self.products)?,
        );
        for (p, v) in &self.ports {
            b = b.with_port(p, unit(&format!("{ctx} port {p}"), units::vec3(v, Dim::Length))?);
        }
        Ok(b)
    }
}

/// Flexible body cantilevered at `P`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalBodyFile {
    #[serde(default)]
    pub kind: Option<String>,
    pub name: String,
    pub mass: Quantity,
    /// Centre of mass seen from `P`.
    pub com: [Quantity; 3],
    /// Inertia about the centre of mass unless `inertia_at = "P"`.
    pub inertia: [Quantity; 6],
    #[serde(default)]
    pub inertia_at: InertiaPoint,
    #[serde(default)]
    pub products: Products,
    pub frequencies: Vec<Quantity>,
    /// One value per mode, or a single value for all.
    pub damping: Vec<f64>,
    /// `n x 6`; extra printed rows beyond `n` are ignored.
    pub participation: Vec<[f64; 6]>,
    /// `6 x n`; zero when absent.
    #[serde(default)]
    pub mode_shapes_c: Option<Vec<Vec<f64>>>,
    /// Child port seen from `P`.
    #[serde(default)]
    pub pc: Option<[Quantity; 3]>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
pub enum InertiaPoint {
    #[default]
    #[serde(alias = "G", alias = "com")]
    Com,
    P,
}

impl ModalBodyFile {
    pub fn to_body(&self) -> Result<ModalBodyData> {
        let ctx = format!("body {}", self.name);
        let mass = unit(&ctx, self.mass.get(Dim::Mass))?;
        let com = unit(&ctx, units::vec3(&self.com, Dim::Length))?;
        let j = inertia(&ctx, &self.inertia, self.products)?;
        let inertia_p = match self.inertia_at {
            InertiaPoint::Com => flexassembly_core::multibody::parallel_axis(&j, mass, &(-com)),
            InertiaPoint::P => j,
        };
        let freqs = unit(&ctx, units::all(&self.frequencies, Dim::Frequency))?;
        let n = freqs.len();
        let damping = match self.damping.len() {
            1 => vec![self.damping[0]; n],
            _ => self.damping.clone(),
        };
        if self.participation.len() < n {
            return Err(ConfigError::Invalid(format!(
                "{ctx}: {} participation rows for {n} modes",
                self.participation.len()
            )));
        }
        let l_p = Mat::from_fn(n, 6, |i, k| self.participation[i][k]);
        let phi_c = match &self.mode_shapes_c {
            None => Mat::zeros(6, n),
            Some(rows) => {
                if rows.len() != 6 || rows.iter().any(|r| r.len() != n) {
                    return Err(ConfigError::Invalid(format!("{ctx}: mode_shapes_c must be 6 x {n}")));
                }
                Mat::from_fn(6, n, |i, k| rows[i][k])
            }
        };
        let pc = match &self.pc {
            Some(v) => unit(&ctx, units::vec3(v, Dim::Length))?,
            None => Vector3::zeros(),
        };
        Ok(ModalBodyData {
            name: self.name.clone(),
            mass,
            inertia_p,
            com,
            freqs,
            damping,
            l_p,
            phi_c,
            pc,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub mass: Quantity,
    /// Centre of mass seen from the proximal joint.
    pub com: [Quantity; 3],
    /// Principal moment, same about every axis.
    pub moi: Quantity,
    /// Proximal to distal joint; twice `com` when absent.
    #[serde(default)]
    pub offset: Option<[Quantity; 3]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotFile {
    #[serde(default)]
    pub kind: Option<String>,
    pub hub: RigidBodyFile,
    /// Links `L0..L5`, shared by the three arms.
    pub links: Vec<LinkEntry>,
    /// Joint axes `J1..J5` in the link frames.
    #[serde(default = "default_axes")]
    pub axes: Vec<[f64; 3]>,
    /// `P_{l5/c}` per arm.
    pub mounts: Vec<[[f64; 3]; 3]>,
}

fn default_axes() -> Vec<[f64; 3]> {
    vec![[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

impl RobotFile {
    pub fn arm(&self) -> Result<ArmGeometry> {
        if self.links.len() != N_JOINTS + 1 || self.axes.len() != N_JOINTS {
            return Err(ConfigError::Invalid(format!(
                "robot: need {} links and {N_JOINTS} axes, got {} and {}",
                N_JOINTS + 1,
                self.links.len(),
                self.axes.len()
            )));
        }
        let mut offsets = [Vector3::zeros(); N_JOINTS + 1];
        let mut links = Vec::new();
        for (k, l) in self.links.iter().enumerate() {
            let ctx = format!("robot link L{k}");
            let g = unit(&ctx, units::vec3(&l.com, Dim::Length))?;
            offsets[k] = match &l.offset {
                Some(o) => unit(&ctx, units::vec3(o, Dim::Length))?,
                None => g * 2.0,
            };
            let moi = unit(&ctx, l.moi.get(Dim::Inertia))?;
            links.push(
                RigidBodyData::new(&format!("L{k}"), unit(&ctx, l.mass.get(Dim::Mass))?, Matrix3::identity() * moi)
                    .with_port("prox", -g)
                    .with_port("dist", offsets[k] - g),
            );
        }
        let axes = std::array::from_fn(|k| Vector3::from(self.axes[k]).normalize());
        let geom = ArmGeometry { offsets, axes, links };
        geom.validate()?;
        Ok(geom)
    }

    pub fn mounts(&self) -> Result<[Dcm; 3]> {
        if self.mounts.len() != 3 {
            return Err(ConfigError::Invalid(format!("robot: {} mounts, expected 3", self.mounts.len())));
        }
        Ok([
            dcm("robot mount 1", &self.mounts[0])?,
            dcm("robot mount 2", &self.mounts[1])?,
            dcm("robot mount 3", &self.mounts[2])?,
        ])
    }
}

/// Inline table or path to a separate file.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(Box<T>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bodies {
    pub hub: Source<RigidBodyFile>,
    pub solar_array: Source<ModalBodyFile>,
    pub tile: Source<RigidBodyFile>,
    pub robot: Source<RobotFile>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frames {
    #[serde(default = "identity")]
    pub solar_array: [[f64; 3]; 3],
    #[serde(default = "identity")]
    pub structure: [[f64; 3]; 3],
    #[serde(default = "identity")]
    pub stack: [[f64; 3]; 3],
}

fn identity() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum LayoutSpec {
    /// Default four-wide serpentine band.
    Band,
    /// Cells `[row, col]` in assembly order.
    Cells {
        cells: Vec<[i32; 2]>,
        #[serde(default = "clamp_default")]
        clamp: Vec<[i32; 2]>,
    },
}

fn clamp_default() -> Vec<[i32; 2]> {
    vec![[0, 0]]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub tile_mass: Option<Quantity>,
    pub k_trans: Option<Quantity>,
    pub k_rot: Option<Quantity>,
    pub diag_factor: Option<f64>,
    pub clamp_factor: Option<f64>,
    /// Rescales the stiffness so the first mode of a band of
    /// `calibration_tiles` tiles lands on this frequency.
    pub calibrate_f1: Option<Quantity>,
    pub calibration_tiles: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureOverride {
    pub n: usize,
    pub j: usize,
    pub file: Source<ModalBodyFile>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Controller {
    pub xi: f64,
    pub omega: Quantity,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub kind: Option<String>,
    pub n_total: usize,
    #[serde(default = "six")]
    pub n_modes: usize,
    pub structure_damping: f64,
    #[serde(default = "seven")]
    pub z: usize,
    pub stack_reach: Quantity,
    /// Stack top seen from `P3`, stack frame.
    pub p3c0: [Quantity; 3],
    pub r_omega: f64,
    pub controller: Controller,
    pub bodies: Bodies,
    pub frames: Frames,
    pub layout: LayoutSpec,
    #[serde(default)]
    pub lattice: Option<LatticeSpec>,
    #[serde(default)]
    pub structures: Vec<StructureOverride>,
}

fn six() -> usize {
    6
}
fn seven() -> usize {
    7
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    toml::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn resolve<T: Clone + for<'de> Deserialize<'de>>(src: &Source<T>, base: &Path) -> Result<T> {
    match src {
        Source::Inline(t) => Ok((**t).clone()),
        Source::Path(p) => parse_file(&base.join(p)),
    }
}

/// Scenario with every referenced file loaded.
#[derive(Clone, Debug)]
pub struct LoadedScenario {
    pub path: PathBuf,
    pub file: ScenarioFile,
    pub hub: RigidBodyFile,
    pub solar_array: ModalBodyFile,
    pub tile: RigidBodyFile,
    pub robot: RobotFile,
    pub structures: Vec<(usize, usize, ModalBodyFile)>,
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let file: ScenarioFile = parse_file(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let structures = file
        .structures
        .iter()
        .map(|s| Ok((s.n, s.j, resolve(&s.file, base)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedScenario {
        path: path.to_path_buf(),
        hub: resolve(&file.bodies.hub, base)?,
        solar_array: resolve(&file.bodies.solar_array, base)?,
        tile: resolve(&file.bodies.tile, base)?,
        robot: resolve(&file.bodies.robot, base)?,
        structures,
        file,
    })
}

impl LoadedScenario {
    pub fn layout(&self) -> Result<TileLayout> {
        Ok(match &self.file.layout {
            LayoutSpec::Band => TileLayout::band(self.file.n_total.max(1)),
            LayoutSpec::Cells { cells, clamp } => TileLayout::new(
                cells.iter().map(|c| (c[0], c[1])).collect(),
                clamp.iter().map(|c| (c[0], c[1])).collect(),
            )?,
        })
    }

    pub fn lattice(&self, tile: &RigidBodyData) -> Result<LatticeParams> {
        let mut p = LatticeParams {
            tile_mass: tile.mass,
            tile_inertia: tile.inertia_g,
            ..LatticeParams::default()
        };
        let Some(spec) = &self.file.lattice else {
            return Ok(p);
        };
        if let Some(m) = &spec.tile_mass {
            p.tile_mass = unit("lattice", m.get(Dim::Mass))?;
        }
        if let Some(k) = &spec.k_trans {
            p.k_trans = unit("lattice", k.get(Dim::Stiffness))?;
        }
        if let Some(k) = &spec.k_rot {
            p.k_rot = unit("lattice", k.get(Dim::RotStiffness))?;
        }
        if let Some(f) = spec.diag_factor {
            p.diag_factor = f;
        }
        if let Some(f) = spec.clamp_factor {
            p.clamp_factor = f;
        }
        if let Some(f1) = &spec.calibrate_f1 {
            let hz = unit("lattice", f1.get(Dim::Frequency))? / (2.0 * std::f64::consts::PI);
            let n = spec.calibration_tiles.unwrap_or(26);
            p = calibrate_stiffness(&p, &TileLayout::band(n), hz)?;
        }
        Ok(p)
    }

    pub fn config(&self) -> Result<ScenarioConfig> {
        let f = &self.file;
        let tile = self.tile.to_body()?;
        let arm = self.robot.arm()?;
        let cfg = ScenarioConfig {
            hub: self.hub.to_body()?,
            solar: self.solar_array.to_body()?,
            solar_frame: dcm("frames.solar_array", &f.frames.solar_array)?,
            structure_frame: dcm("frames.structure", &f.frames.structure)?,
            stack_frame: dcm("frames.stack", &f.frames.stack)?,
            p3c0: unit("p3c0", units::vec3(&f.p3c0, Dim::Length))?,
            lattice: self.lattice(&tile)?,
            tile,
            n_total: f.n_total,
            layout: self.layout()?,
            n_modes: f.n_modes,
            structure_damping: f.structure_damping,
            arms: [arm.clone(), arm.clone(), arm],
            robot_hub: self.robot.hub.to_body()?,
            arm_mounts: self.robot.mounts()?,
            xi_att: f.controller.xi,
            omega_att_hz: unit("controller.omega", f.controller.omega.get(Dim::Frequency))? / (2.0 * std::f64::consts::PI),
            r_omega: f.r_omega,
            z: f.z,
            stack_reach: unit("stack_reach", f.stack_reach.get(Dim::Length))?,
        };
        Ok(cfg)
    }

    /// Lattice structures for every size, replaced by file data where given.
    pub fn structure_bank(&self, cfg: &ScenarioConfig) -> Result<StructureBank> {
        let mut bank = StructureBank::from_lattice(cfg)?;
        for (n, j, f) in &self.structures {
            bank.insert(*n, *j, f.to_body()?);
        }
        Ok(bank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modal_body_from_text() {
        let text = r#"
            name = "beam"
            mass = "2 kg"
            com = ["0 m", "0.5 m", "0 m"]
            inertia = [1.0, 0.0, 0.0, 0.1, 0.0, 1.0]
            frequencies = ["2 hz"]
            damping = [0.02]
            participation = [[0.0, 0.0, 1.0, 0.2, 0.0, 0.0], [9.0, 9.0, 9.0, 9.0, 9.0, 9.0]]
        "#;
        let f: ModalBodyFile = toml::from_str(text).unwrap();
        let b = f.to_body().unwrap();
        assert_eq!(b.n_modes(), 1);
        assert_eq!(b.l_p.nrows(), 1);
        assert!((b.freqs[0] - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        // transported to P: + m d^2 about x
        assert!((b.inertia_p[(0, 0)] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bare_frequency_rejected() {
        let text = r#"
            name = "beam"
            mass = 2.0
            com = [0.0, 0.5, 0.0]
            inertia = [1.0, 0.0, 0.0, 0.1, 0.0, 1.0]
            frequencies = [2.0]
            damping = [0.02]
            participation = [[0.0, 0.0, 1.0, 0.2, 0.0, 0.0]]
        "#;
        let f: ModalBodyFile = toml::from_str(text).unwrap();
        assert!(matches!(f.to_body(), Err(ConfigError::Unit { .. })));
    }
}
