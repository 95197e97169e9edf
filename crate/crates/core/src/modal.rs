//! Flexible-structure data: tile layouts, a lumped-parameter lattice standing
//! in for a finite-element model, its clamped-free modes and the reduction to
//! [`ModalBodyData`].
//!
//! Geometry lives in the structure frame `f`: origin at the clamping point
//! `P2`, tiles of 1 m pitch lying in the `z = 0` plane. Cell `(row, col)` has
//! its centre at `(col + 0.5, row + 0.5, 0)`.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{skew, Mat};
use crate::multibody::{tau, ModalBodyData};
use crate::tables;

pub type Cell = (i32, i32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adjacency {
    Side,
    Diagonal,
}

pub fn adjacency(a: Cell, b: Cell) -> Option<Adjacency> {
    let dr = (a.0 - b.0).abs();
    let dc = (a.1 - b.1).abs();
    match (dr, dc) {
        (0, 1) | (1, 0) => Some(Adjacency::Side),
        (1, 1) => Some(Adjacency::Diagonal),
        _ => None,
    }
}

pub fn cell_center(c: Cell) -> Vector3<f64> {
    Vector3::new(c.1 as f64 + 0.5, c.0 as f64 + 0.5, 0.0)
}

/// Occupied cells in assembly order; tile `k` (1-based) sits in `cells[k-1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileLayout {
    cells: Vec<Cell>,
    clamp_cells: Vec<Cell>,
}

impl TileLayout {
    /// Checks uniqueness and that clamp cells are occupied. Assembly-order
    /// adjacency is checked by [`TileLayout::check_order`].
    pub fn new(cells: Vec<Cell>, clamp_cells: Vec<Cell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::LayoutError("empty layout".into()));
        }
        for (i, c) in cells.iter().enumerate() {
            if cells[..i].contains(c) {
                return Err(Error::LayoutError(alloc::format!("cell {c:?} listed twice")));
            }
        }
        if clamp_cells.is_empty() {
            return Err(Error::LayoutError("no clamp cell".into()));
        }
        for c in &clamp_cells {
            if !cells.contains(c) {
                return Err(Error::LayoutError(alloc::format!("clamp cell {c:?} is not occupied")));
            }
        }
        Ok(TileLayout { cells, clamp_cells })
    }

    /// Default stand-in layout: a band four tiles wide (columns -2..=1) that
    /// grows away from the hub row by row, starting at cell `(0, 0)` next to
    /// `P2`. Row 0 fills outwards from the clamp, later rows snake.
    pub fn band(n: usize) -> Self {
        let mut cells = alloc::vec![(0, 0), (0, 1), (0, -1), (0, -2)];
        let mut row = 1;
        while cells.len() < n {
            if row % 2 == 1 {
                cells.extend((-2..=1).map(|c| (row, c)));
            } else {
                cells.extend((-2..=1).rev().map(|c| (row, c)));
            }
            row += 1;
        }
        cells.truncate(n.max(1));
        TileLayout {
            cells,
            clamp_cells: alloc::vec![(0, 0)],
        }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn clamp_cells(&self) -> &[Cell] {
        &self.clamp_cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell of tile `k` (1-based).
    pub fn cell(&self, k: usize) -> Option<Cell> {
        if k == 0 {
            return None;
        }
        self.cells.get(k - 1).copied()
    }

    /// 1-based tile number of a cell.
    pub fn tile_at(&self, c: Cell) -> Option<usize> {
        self.cells.iter().position(|x| *x == c).map(|i| i + 1)
    }

    pub fn tile_center(&self, k: usize) -> Option<Vector3<f64>> {
        self.cell(k).map(cell_center)
    }

    /// The first `n` tiles; clamp cells not yet placed are dropped.
    pub fn prefix(&self, n: usize) -> Result<TileLayout> {
        if n == 0 || n > self.cells.len() {
            return Err(Error::LayoutError(alloc::format!(
                "prefix of {n} tiles from a layout of {}",
                self.cells.len()
            )));
        }
        let cells = self.cells[..n].to_vec();
        let clamp_cells: Vec<Cell> = self.clamp_cells.iter().filter(|c| cells.contains(c)).copied().collect();
        TileLayout::new(cells, clamp_cells)
    }

    /// Every tile after the first must touch an earlier one, sideways or
    /// diagonally, and the first tile must be clamped.
    pub fn check_order(&self) -> Result<()> {
        if !self.clamp_cells.contains(&self.cells[0]) {
            return Err(Error::LayoutError("first tile is not a clamp cell".into()));
        }
        for (i, c) in self.cells.iter().enumerate().skip(1) {
            if !self.cells[..i].iter().any(|p| adjacency(*p, *c).is_some()) {
                return Err(Error::LayoutError(alloc::format!(
                    "tile {} at {c:?} touches no earlier tile",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Index (1-based) of a tile with no side or diagonal neighbour, if any.
    fn isolated_tile(&self) -> Option<usize> {
        if self.cells.len() < 2 {
            return None;
        }
        let mut seen = alloc::vec![false; self.cells.len()];
        let mut stack = alloc::vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, c) in self.cells.iter().enumerate() {
                if !seen[j] && adjacency(self.cells[i], *c).is_some() {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().position(|s| !s).map(|i| i + 1)
    }
}

/// Lumped-parameter coupling model. Springs act between tile edge midpoints
/// (side neighbours) or shared corners (diagonal neighbours).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeParams {
    pub tile_mass: f64,
    /// Tile inertia about its centre.
    pub tile_inertia: Matrix3<f64>,
    /// Translational spring stiffness (N/m).
    pub k_trans: f64,
    /// Rotational spring stiffness (N m/rad).
    pub k_rot: f64,
    /// Stiffness factor of diagonal springs relative to side springs.
    pub diag_factor: f64,
    /// Stiffness factor of the clamp springs relative to side springs.
    pub clamp_factor: f64,
}

/// Translational stiffness that places the first mode of the default 26-tile
/// band at 0.912 Hz; reproduced by [`calibrate_stiffness`].
pub const CALIBRATED_K_TRANS: f64 = 79_407.86;

impl Default for LatticeParams {
    fn default() -> Self {
        LatticeParams {
            tile_mass: tables::TILE_MASS,
            tile_inertia: tables::tile().inertia_g,
            k_trans: CALIBRATED_K_TRANS,
            k_rot: 0.5 * CALIBRATED_K_TRANS,
            diag_factor: 0.5,
            clamp_factor: 4.0,
        }
    }
}

impl LatticeParams {
    pub fn scaled(mut self, s: f64) -> Self {
        self.k_trans *= s;
        self.k_rot *= s;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeModel {
    /// Node positions in the structure frame.
    pub positions: Vec<Vector3<f64>>,
    pub m: Mat,
    pub k: Mat,
    /// Degrees of freedom removed before the eigen-solve.
    pub clamped_dofs: Vec<usize>,
    /// Node of tile `k` is `tile_map[k - 1]`.
    pub tile_map: Vec<usize>,
    /// Ground point of the clamp springs.
    pub clamp_point: Vector3<f64>,
}

impl LatticeModel {
    pub fn n_dofs(&self) -> usize {
        self.m.nrows()
    }

    pub fn total_mass(&self) -> f64 {
        (0..self.positions.len()).map(|i| self.m[(6 * i, 6 * i)]).sum()
    }

    fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|d| !self.clamped_dofs.contains(d)).collect()
    }
}

/// Adds a 6-dof spring between point `p` of node `i` and point `p` of node
/// `j` (or ground when `j` is `None`).
fn add_spring(k: &mut Mat, pos: &[Vector3<f64>], i: usize, j: Option<usize>, p: &Vector3<f64>, kt: f64, kr: f64) {
    // twist of the point as a rigid part of node n: tau_{p x_n} [u; theta]
    let gi = tau(&(pos[i] - p));
    let mut g = Mat::zeros(6, 6 * pos.len());
    for r in 0..6 {
        for c in 0..6 {
            g[(r, 6 * i + c)] -= gi[(r, c)];
        }
    }
    if let Some(j) = j {
        let gj = tau(&(pos[j] - p));
        for r in 0..6 {
            for c in 0..6 {
                g[(r, 6 * j + c)] += gj[(r, c)];
            }
        }
    }
    let ks = Mat::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![kt, kt, kt, kr, kr, kr]));
    *k += g.transpose() * ks * &g;
}

/// One 6-dof node per tile centre, side and diagonal springs between
/// neighbours, clamp springs from the clamp cells to ground at `P2`.
pub fn build_lattice(layout: &TileLayout, params: &LatticeParams) -> Result<LatticeModel> {
    if let Some(t) = layout.isolated_tile() {
        return Err(Error::DisconnectedLayout(t));
    }
    let n = layout.len();
    let pos: Vec<Vector3<f64>> = layout.cells().iter().map(|c| cell_center(*c)).collect();
    let mut m = Mat::zeros(6 * n, 6 * n);
    for i in 0..n {
        for d in 0..3 {
            m[(6 * i + d, 6 * i + d)] = params.tile_mass;
        }
        m.view_mut((6 * i + 3, 6 * i + 3), (3, 3)).copy_from(&params.tile_inertia);
    }
    let mut k = Mat::zeros(6 * n, 6 * n);
    let cells = layout.cells();
    for i in 0..n {
        for j in i + 1..n {
            let f = match adjacency(cells[i], cells[j]) {
                Some(Adjacency::Side) => 1.0,
                Some(Adjacency::Diagonal) => params.diag_factor,
                None => continue,
            };
            let mid = (pos[i] + pos[j]) * 0.5;
            add_spring(&mut k, &pos, i, Some(j), &mid, f * params.k_trans, f * params.k_rot);
        }
    }
    let ground = Vector3::zeros();
    for c in layout.clamp_cells() {
        let i = layout.tile_at(*c).expect("clamp cells are occupied") - 1;
        let f = params.clamp_factor;
        add_spring(&mut k, &pos, i, None, &ground, f * params.k_trans, f * params.k_rot);
    }
    Ok(LatticeModel {
        positions: pos,
        m,
        k,
        clamped_dofs: Vec::new(),
        tile_map: (0..n).collect(),
        clamp_point: ground,
    })
}

/// Solves `K phi = w^2 M phi` on the free dofs. Returns angular frequencies
/// (ascending) and mass-normalised shapes over all dofs (zero on clamped dofs).
pub fn clamped_free_modes(model: &LatticeModel, n_modes: usize) -> Result<(Vec<f64>, Mat)> {
    let free = model.free_dofs();
    let nf = free.len();
    if n_modes > nf {
        return Err(Error::EigenFailure(alloc::format!(
            "{n_modes} modes requested from {nf} free dofs"
        )));
    }
    let mf = model.m.select_rows(&free).select_columns(&free);
    let kf = model.k.select_rows(&free).select_columns(&free);
    let chol = mf
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigenFailure("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigenFailure("singular mass factor".into()))?;
    let a = &linv * &kf * linv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(a, 1e-14, 0)
        .ok_or_else(|| Error::EigenFailure("symmetric eigen-solve did not converge".into()))?;
    let mut order: Vec<usize> = (0..nf).collect();
    order.sort_by(|i, j| eig.eigenvalues[*i].total_cmp(&eig.eigenvalues[*j]));
    let mut freqs = Vec::with_capacity(n_modes);
    let mut shapes = Mat::zeros(model.n_dofs(), n_modes);
    for (col, idx) in order.iter().take(n_modes).enumerate() {
        let lam = eig.eigenvalues[*idx];
        if !(lam > 0.0) {
            return Err(Error::EigenFailure(alloc::format!(
                "non-positive eigenvalue {lam:.3e}: stiffness is singular on the free dofs"
            )));
        }
        freqs.push(lam.sqrt());
        let phi = linv.transpose() * eig.eigenvectors.column(*idx);
        // deterministic sign: largest component positive
        let imax = phi.iamax();
        let s = if phi[imax] < 0.0 { -1.0 } else { 1.0 };
        for (r, d) in free.iter().enumerate() {
            shapes[(*d, col)] = s * phi[r];
        }
    }
    Ok((freqs, shapes))
}

/// Rigid transport of a twist at `p` to every node: `6N x 6`.
pub fn rigid_modes(model: &LatticeModel, p: &Vector3<f64>) -> Mat {
    let n = model.positions.len();
    let mut t = Mat::zeros(6 * n, 6);
    for (i, x) in model.positions.iter().enumerate() {
        let ti = tau(&(p - x));
        for r in 0..6 {
            for c in 0..6 {
                t[(6 * i + r, c)] = ti[(r, c)];
            }
        }
    }
    t
}

/// Clamped-free modes of one lattice, reusable for every output tile.
#[derive(Clone, Debug, PartialEq)]
pub struct ModalBasis {
    pub model: LatticeModel,
    pub freqs: Vec<f64>,
    pub shapes: Mat,
}

pub fn modal_basis(model: LatticeModel, n_modes: usize) -> Result<ModalBasis> {
    let (freqs, shapes) = clamped_free_modes(&model, n_modes)?;
    Ok(ModalBasis { model, freqs, shapes })
}

/// Modal reduction of the lattice clamped at `p` with its output port at the
/// centre of tile `c_tile` (1-based).
pub fn modal_reduce(model: &LatticeModel, p: &Vector3<f64>, c_tile: usize, n_modes: usize, xi: f64) -> Result<ModalBodyData> {
    check_points(model, p, c_tile)?;
    reduce_basis(&modal_basis(model.clone(), n_modes)?, p, c_tile, xi)
}

fn check_points(model: &LatticeModel, p: &Vector3<f64>, c_tile: usize) -> Result<()> {
    if (p - model.clamp_point).norm() > 1e-9 {
        return Err(Error::UnknownPoint(alloc::format!(
            "{:?} is not the clamp point of the lattice",
            p.as_slice()
        )));
    }
    if c_tile == 0 || c_tile > model.tile_map.len() {
        return Err(Error::UnknownPoint(alloc::format!(
            "tile {c_tile} of {}",
            model.tile_map.len()
        )));
    }
    Ok(())
}

/// [`modal_reduce`] on precomputed modes.
pub fn reduce_basis(basis: &ModalBasis, p: &Vector3<f64>, c_tile: usize, xi: f64) -> Result<ModalBodyData> {
    let model = &basis.model;
    check_points(model, p, c_tile)?;
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidModalData(alloc::format!("damping {xi} must lie in (0, 1)")));
    }
    let shapes = &basis.shapes;
    let t = rigid_modes(model, p);
    let l_p = shapes.transpose() * &model.m * &t;

    let node = model.tile_map[c_tile - 1];
    let phi_c = shapes.rows(6 * node, 6).into_owned();

    let mut mass = 0.0;
    let mut first = Vector3::zeros();
    let mut j_p = Matrix3::zeros();
    for (i, x) in model.positions.iter().enumerate() {
        let mi = model.m[(6 * i, 6 * i)];
        let r = x - p;
        let sr = skew(&r);
        mass += mi;
        first += r * mi;
        j_p += model.m.fixed_view::<3, 3>(6 * i + 3, 6 * i + 3) - sr * sr * mi;
    }
    Ok(ModalBodyData {
        name: structure_name(model.tile_map.len(), c_tile),
        mass,
        inertia_p: j_p,
        com: first / mass,
        damping: alloc::vec![xi; basis.freqs.len()],
        freqs: basis.freqs.clone(),
        l_p,
        phi_c,
        pc: model.positions[node] - p,
    })
}

/// Scales the spring stiffnesses so that the first clamped-free mode of
/// `layout` lands on `target_hz`. Frequencies scale with the square root of
/// a uniform stiffness factor, so one step is exact.
pub fn calibrate_stiffness(params: &LatticeParams, layout: &TileLayout, target_hz: f64) -> Result<LatticeParams> {
    let model = build_lattice(layout, params)?;
    let (f, _) = clamped_free_modes(&model, 1)?;
    let f1 = f[0] / (2.0 * core::f64::consts::PI);
    let s = (target_hz / f1) * (target_hz / f1);
    Ok(params.scaled(s))
}

/// Name used for a structure with `n` tiles docked at tile `j`.
pub fn structure_name(n: usize, j: usize) -> String {
    alloc::format!("F{n}_C{j}")
}
