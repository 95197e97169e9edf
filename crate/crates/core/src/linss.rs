//! Labeled-channel continuous-time state-space models.
//!
//! Inputs and outputs are grouped into named channels so block diagrams can be
//! wired by name. [`Network`] closes arbitrary static/dynamic interconnections,
//! and the norm routines operate on any stable realization.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::DVector;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{width, Error, Result};
use crate::linalg::{
    balance_scaling, eigenvalues, lyapunov, range_basis, sigma_max, sigma_max_real,
    singular_values, spectral_abscissa, to_complex, CMat, Mat,
};

/// Stability margin on the real part of the spectrum.
pub const STABILITY_TOL: f64 = 1e-10;
/// Relative singular-value threshold for loop well-posedness.
pub const WELL_POSED_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Channel {
    pub name: String,
    pub width: usize,
}

impl Channel {
    pub fn new(name: &str, width: usize) -> Self {
        Channel {
            name: name.to_string(),
            width,
        }
    }
}

pub fn channels(spec: &[(&str, usize)]) -> Vec<Channel> {
    spec.iter().map(|(n, w)| Channel::new(n, *w)).collect()
}

fn channel_range(list: &[Channel], name: &str) -> Option<Range<usize>> {
    let mut off = 0;
    for c in list {
        if c.name == name {
            return Some(off..off + c.width);
        }
        off += c.width;
    }
    None
}

fn check_channels(list: &[Channel], total: usize, what: &str) -> Result<()> {
    let sum: usize = list.iter().map(|c| c.width).sum();
    if sum != total {
        return Err(width(what, total, sum));
    }
    for (i, c) in list.iter().enumerate() {
        if list[..i].iter().any(|o| o.name == c.name) {
            return Err(Error::DuplicateChannel(c.name.clone()));
        }
    }
    Ok(())
}

/// `x' = A x + B u`, `y = C x + D u` with named channel groups.
#[derive(Clone, Debug)]
pub struct StateSpace {
    a: Mat,
    b: Mat,
    c: Mat,
    d: Mat,
    inputs: Vec<Channel>,
    outputs: Vec<Channel>,
}

impl StateSpace {
    pub fn new(
        a: Mat,
        b: Mat,
        c: Mat,
        d: Mat,
        inputs: Vec<Channel>,
        outputs: Vec<Channel>,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n {
            return Err(Error::Dimension(alloc::format!(
                "A {}x{}, B {}x{}, C {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Dimension(alloc::format!(
                "D {}x{} vs C rows {} / B cols {}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        check_channels(&inputs, b.ncols(), "input channels")?;
        check_channels(&outputs, c.nrows(), "output channels")?;
        Ok(StateSpace {
            a,
            b,
            c,
            d,
            inputs,
            outputs,
        })
    }

    /// Stateless model `y = D u`.
    pub fn gain(d: Mat, inputs: Vec<Channel>, outputs: Vec<Channel>) -> Result<Self> {
        let (p, m) = d.shape();
        StateSpace::new(Mat::zeros(0, 0), Mat::zeros(0, m), Mat::zeros(p, 0), d, inputs, outputs)
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }
    pub fn b(&self) -> &Mat {
        &self.b
    }
    pub fn c(&self) -> &Mat {
        &self.c
    }
    pub fn d(&self) -> &Mat {
        &self.d
    }
    pub fn inputs(&self) -> &[Channel] {
        &self.inputs
    }
    pub fn outputs(&self) -> &[Channel] {
        &self.outputs
    }
    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn input_range(&self, name: &str) -> Result<Range<usize>> {
        channel_range(&self.inputs, name).ok_or_else(|| Error::UnknownChannel(name.to_string()))
    }

    pub fn output_range(&self, name: &str) -> Result<Range<usize>> {
        channel_range(&self.outputs, name).ok_or_else(|| Error::UnknownChannel(name.to_string()))
    }

    pub fn has_input(&self, name: &str) -> bool {
        channel_range(&self.inputs, name).is_some()
    }

    pub fn has_output(&self, name: &str) -> bool {
        channel_range(&self.outputs, name).is_some()
    }

    pub fn rename_input(mut self, old: &str, new: &str) -> Result<Self> {
        self.input_range(old)?;
        if old != new && self.has_input(new) {
            return Err(Error::DuplicateChannel(new.to_string()));
        }
        for c in self.inputs.iter_mut() {
            if c.name == old {
                c.name = new.to_string();
            }
        }
        Ok(self)
    }

    pub fn rename_output(mut self, old: &str, new: &str) -> Result<Self> {
        self.output_range(old)?;
        if old != new && self.has_output(new) {
            return Err(Error::DuplicateChannel(new.to_string()));
        }
        for c in self.outputs.iter_mut() {
            if c.name == old {
                c.name = new.to_string();
            }
        }
        Ok(self)
    }

    /// Sub-system keeping only the listed channels, in the listed order.
    pub fn select(&self, inputs: &[&str], outputs: &[&str]) -> Result<StateSpace> {
        let mut icols = Vec::new();
        let mut ich = Vec::new();
        for name in inputs {
            let r = self.input_range(name)?;
            ich.push(Channel::new(name, r.len()));
            icols.extend(r);
        }
        let mut orows = Vec::new();
        let mut och = Vec::new();
        for name in outputs {
            let r = self.output_range(name)?;
            och.push(Channel::new(name, r.len()));
            orows.extend(r);
        }
        let b = self.b.select_columns(icols.iter());
        let c = self.c.select_rows(orows.iter());
        let d = self.d.select_rows(orows.iter()).select_columns(icols.iter());
        StateSpace::new(self.a.clone(), b, c, d, ich, och)
    }

    /// Replaces output channel `name` by `m * y_name`.
    pub fn transform_output(mut self, name: &str, m: &Mat) -> Result<Self> {
        let r = self.output_range(name)?;
        if m.ncols() != r.len() || m.nrows() != r.len() {
            return Err(width(name, r.len(), m.ncols()));
        }
        let c = m * self.c.rows(r.start, r.len());
        let d = m * self.d.rows(r.start, r.len());
        self.c.rows_mut(r.start, r.len()).copy_from(&c);
        self.d.rows_mut(r.start, r.len()).copy_from(&d);
        Ok(self)
    }

    /// Re-expresses input channel `name` so that `u_old = m * u_new`.
    pub fn transform_input(mut self, name: &str, m: &Mat) -> Result<Self> {
        let r = self.input_range(name)?;
        if m.ncols() != r.len() || m.nrows() != r.len() {
            return Err(width(name, r.len(), m.ncols()));
        }
        let b = self.b.columns(r.start, r.len()) * m;
        let d = self.d.columns(r.start, r.len()) * m;
        self.b.columns_mut(r.start, r.len()).copy_from(&b);
        self.d.columns_mut(r.start, r.len()).copy_from(&d);
        Ok(self)
    }

    /// Multiplies every output by `k`.
    pub fn scaled(mut self, k: f64) -> Self {
        self.c *= k;
        self.d *= k;
        self
    }

    /// State change `x = T x_new`.
    pub fn similarity(&self, t: &Mat) -> Result<StateSpace> {
        let ti = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Dimension("singular similarity transform".into()))?;
        StateSpace::new(
            &ti * &self.a * t,
            &ti * &self.b,
            &self.c * t,
            self.d.clone(),
            self.inputs.clone(),
            self.outputs.clone(),
        )
    }

    /// `C (sI - A)^-1 B + D`.
    pub fn transfer_at(&self, s: Complex64) -> Result<CMat> {
        let n = self.n_states();
        let d = to_complex(&self.d);
        if n == 0 {
            return Ok(d);
        }
        let mut m = to_complex(&self.a).scale(-1.0);
        for i in 0..n {
            m[(i, i)] += s;
        }
        let x = m
            .lu()
            .solve(&to_complex(&self.b))
            .ok_or_else(|| Error::EigenFailure("sI - A is singular".into()))?;
        Ok(to_complex(&self.c) * x + d)
    }

    /// Static gain `D - C A^-1 B`.
    pub fn dc_gain(&self) -> Result<Mat> {
        if self.n_states() == 0 {
            return Ok(self.d.clone());
        }
        let x = self
            .a
            .clone()
            .lu()
            .solve(&self.b)
            .ok_or_else(|| Error::EigenFailure("A is singular; DC gain undefined".into()))?;
        Ok(&self.d - &self.c * x)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        eigenvalues(&self.a)
    }
}

/// Ordered set of positive angular frequencies (rad/s).
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if points.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidGrid("frequencies must be positive and finite".into()));
        }
        if points.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidGrid("frequencies must be strictly increasing".into()));
        }
        Ok(FrequencyGrid { points })
    }

    pub fn log_space(w_min: f64, w_max: f64, n: usize) -> Result<Self> {
        if n == 0 || !(w_min > 0.0) || !(w_max > w_min) {
            return Err(Error::InvalidGrid(alloc::format!(
                "log_space({w_min}, {w_max}, {n})"
            )));
        }
        if n == 1 {
            return FrequencyGrid::new(alloc::vec![w_min]);
        }
        let (l0, l1) = (w_min.ln(), w_max.ln());
        let pts = (0..n)
            .map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp())
            .collect();
        FrequencyGrid::new(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

#[derive(Clone, Debug)]
pub struct FreqResponse {
    pub omegas: Vec<f64>,
    pub values: Vec<CMat>,
    /// Grid points lying on (or within 1e-12 of) a pole of the model.
    pub skipped: Vec<f64>,
}

impl FreqResponse {
    pub fn sigma_max(&self) -> Vec<f64> {
        self.values.iter().map(sigma_max).collect()
    }
}

pub fn freq_response(sys: &StateSpace, grid: &FrequencyGrid) -> Result<FreqResponse> {
    let poles = eigenvalues(&sys.a)?;
    let mut out = FreqResponse {
        omegas: Vec::new(),
        values: Vec::new(),
        skipped: Vec::new(),
    };
    for &w in grid.points() {
        let s = Complex64::new(0.0, w);
        if poles.iter().any(|p| (s - p).norm() < 1e-12) {
            out.skipped.push(w);
            continue;
        }
        match sys.transfer_at(s) {
            Ok(g) => {
                out.omegas.push(w);
                out.values.push(g);
            }
            Err(_) => out.skipped.push(w),
        }
    }
    Ok(out)
}

/// Returns `(stable, spectral abscissa)`; a failed eigen-solve counts as unstable.
pub fn is_stable(sys: &StateSpace) -> (bool, f64) {
    match spectral_abscissa(&sys.a) {
        Ok(x) => (x < -STABILITY_TOL, x),
        Err(_) => (false, f64::NAN),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockId(usize);

#[derive(Clone, Debug)]
struct Wire {
    from: (usize, String),
    to: (usize, String),
    gain: Option<Mat>,
}

#[derive(Clone, Debug)]
struct ExtIn {
    name: String,
    width: usize,
    targets: Vec<(usize, String, Option<Mat>)>,
}

#[derive(Clone, Debug)]
struct ExtOut {
    name: String,
    source: (usize, String),
    gain: Option<Mat>,
}

/// Block-diagram builder. Unconnected block inputs are held at zero.
#[derive(Clone, Debug, Default)]
pub struct Network {
    blocks: Vec<(String, StateSpace)>,
    wires: Vec<Wire>,
    ext_in: Vec<ExtIn>,
    ext_out: Vec<ExtOut>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, sys: StateSpace) -> BlockId {
        self.blocks.push((name.to_string(), sys));
        BlockId(self.blocks.len() - 1)
    }

    pub fn block(&self, id: BlockId) -> &StateSpace {
        &self.blocks[id.0].1
    }

    /// `target.input += source.output`.
    pub fn connect(&mut self, src: BlockId, out: &str, dst: BlockId, inp: &str) {
        self.wires.push(Wire {
            from: (src.0, out.to_string()),
            to: (dst.0, inp.to_string()),
            gain: None,
        });
    }

    /// `target.input += gain * source.output`.
    pub fn connect_gain(&mut self, src: BlockId, out: &str, dst: BlockId, inp: &str, gain: Mat) {
        self.wires.push(Wire {
            from: (src.0, out.to_string()),
            to: (dst.0, inp.to_string()),
            gain: Some(gain),
        });
    }

    /// Declares an external input feeding one or more block inputs.
    pub fn input(&mut self, name: &str, width: usize, targets: &[(BlockId, &str, Option<Mat>)]) {
        self.ext_in.push(ExtIn {
            name: name.to_string(),
            width,
            targets: targets
                .iter()
                .map(|(b, c, g)| (b.0, c.to_string(), g.clone()))
                .collect(),
        });
    }

    /// Re-exports a block input under its own name.
    pub fn pass_input(&mut self, block: BlockId, chan: &str) -> Result<()> {
        let w = self.blocks[block.0].1.input_range(chan)?.len();
        self.input(chan, w, &[(block, chan, None)]);
        Ok(())
    }

    pub fn output(&mut self, name: &str, block: BlockId, chan: &str, gain: Option<Mat>) {
        self.ext_out.push(ExtOut {
            name: name.to_string(),
            source: (block.0, chan.to_string()),
            gain,
        });
    }

    pub fn build(&self) -> Result<StateSpace> {
        let nb = self.blocks.len();
        let mut xo = Vec::with_capacity(nb + 1);
        let mut uo = Vec::with_capacity(nb + 1);
        let mut yo = Vec::with_capacity(nb + 1);
        let (mut nx, mut nu, mut ny) = (0, 0, 0);
        for (_, s) in &self.blocks {
            xo.push(nx);
            uo.push(nu);
            yo.push(ny);
            nx += s.n_states();
            nu += s.n_inputs();
            ny += s.n_outputs();
        }

        let mut a = Mat::zeros(nx, nx);
        let mut b = Mat::zeros(nx, nu);
        let mut c = Mat::zeros(ny, nx);
        let mut d = Mat::zeros(ny, nu);
        for (k, (_, s)) in self.blocks.iter().enumerate() {
            let (n, m, p) = (s.n_states(), s.n_inputs(), s.n_outputs());
            a.view_mut((xo[k], xo[k]), (n, n)).copy_from(&s.a);
            b.view_mut((xo[k], uo[k]), (n, m)).copy_from(&s.b);
            c.view_mut((yo[k], xo[k]), (p, n)).copy_from(&s.c);
            d.view_mut((yo[k], uo[k]), (p, m)).copy_from(&s.d);
        }

        let ctx = |blk: usize, ch: &str| -> String {
            alloc::format!("{}.{}", self.blocks[blk].0, ch)
        };

        let mut wiring = Mat::zeros(nu, ny);
        for w in &self.wires {
            let (sb, ref sc) = w.from;
            let (tb, ref tc) = w.to;
            let sr = self.blocks[sb].1.output_range(sc).map_err(|_| Error::UnknownChannel(ctx(sb, sc)))?;
            let tr = self.blocks[tb].1.input_range(tc).map_err(|_| Error::UnknownChannel(ctx(tb, tc)))?;
            let g = match &w.gain {
                Some(g) => {
                    if g.nrows() != tr.len() {
                        return Err(width(&ctx(tb, tc), tr.len(), g.nrows()));
                    }
                    if g.ncols() != sr.len() {
                        return Err(width(&ctx(sb, sc), sr.len(), g.ncols()));
                    }
                    g.clone()
                }
                None => {
                    if sr.len() != tr.len() {
                        return Err(width(&ctx(tb, tc), tr.len(), sr.len()));
                    }
                    Mat::identity(tr.len(), tr.len())
                }
            };
            let mut v = wiring.view_mut((uo[tb] + tr.start, yo[sb] + sr.start), (tr.len(), sr.len()));
            v += &g;
        }

        let nw: usize = self.ext_in.iter().map(|e| e.width).sum();
        let mut e_mat = Mat::zeros(nu, nw);
        let mut in_ch = Vec::new();
        let mut col = 0;
        for e in &self.ext_in {
            for (tb, tc, g) in &e.targets {
                let tr = self.blocks[*tb].1.input_range(tc).map_err(|_| Error::UnknownChannel(ctx(*tb, tc)))?;
                let g = match g {
                    Some(g) => {
                        if g.nrows() != tr.len() || g.ncols() != e.width {
                            return Err(width(&ctx(*tb, tc), tr.len(), g.nrows()));
                        }
                        g.clone()
                    }
                    None => {
                        if tr.len() != e.width {
                            return Err(width(&ctx(*tb, tc), tr.len(), e.width));
                        }
                        Mat::identity(e.width, e.width)
                    }
                };
                let mut v = e_mat.view_mut((uo[*tb] + tr.start, col), (tr.len(), e.width));
                v += &g;
            }
            in_ch.push(Channel::new(&e.name, e.width));
            col += e.width;
        }

        let mut f_rows: Vec<Mat> = Vec::new();
        let mut out_ch = Vec::new();
        for o in &self.ext_out {
            let (sb, ref sc) = o.source;
            let sr = self.blocks[sb].1.output_range(sc).map_err(|_| Error::UnknownChannel(ctx(sb, sc)))?;
            let g = match &o.gain {
                Some(g) => {
                    if g.ncols() != sr.len() {
                        return Err(width(&ctx(sb, sc), sr.len(), g.ncols()));
                    }
                    g.clone()
                }
                None => Mat::identity(sr.len(), sr.len()),
            };
            let mut f = Mat::zeros(g.nrows(), ny);
            f.view_mut((0, yo[sb] + sr.start), (g.nrows(), sr.len())).copy_from(&g);
            out_ch.push(Channel::new(&o.name, g.nrows()));
            f_rows.push(f);
        }
        let nz: usize = f_rows.iter().map(|f| f.nrows()).sum();
        let mut f_mat = Mat::zeros(nz, ny);
        let mut row = 0;
        for f in &f_rows {
            f_mat.view_mut((row, 0), (f.nrows(), ny)).copy_from(f);
            row += f.nrows();
        }

        // u = (I - M D)^-1 (M C x + E w)
        let loop_m = Mat::identity(nu, nu) - &wiring * &d;
        let s = solve_loop(&loop_m)?;
        let smc = &s * &wiring * &c;
        let se = &s * &e_mat;
        let a_cl = &a + &b * &smc;
        let b_cl = &b * &se;
        let c_cl = &f_mat * (&c + &d * &smc);
        let d_cl = &f_mat * &d * &se;
        StateSpace::new(a_cl, b_cl, c_cl, d_cl, in_ch, out_ch)
    }
}

fn solve_loop(l: &Mat) -> Result<Mat> {
    let n = l.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let sv = singular_values(l);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin < WELL_POSED_TOL * smax.max(1.0) {
        return Err(Error::IllPosedLoop { sigma_min: smin });
    }
    l.clone()
        .lu()
        .solve(&Mat::identity(n, n))
        .ok_or(Error::IllPosedLoop { sigma_min: smin })
}

/// Free-function form of [`Network`]: blocks are addressed by index, and
/// external channels keep the block channel's name.
pub fn interconnect(
    blocks: &[StateSpace],
    wiring: &[(usize, &str, usize, &str)],
    external_in: &[(usize, &str)],
    external_out: &[(usize, &str)],
) -> Result<StateSpace> {
    let mut net = Network::new();
    let ids: Vec<BlockId> = blocks
        .iter()
        .enumerate()
        .map(|(k, b)| net.add(&alloc::format!("b{k}"), b.clone()))
        .collect();
    for &(sb, so, tb, ti) in wiring {
        net.connect(ids[sb], so, ids[tb], ti);
    }
    for &(b, ch) in external_in {
        net.pass_input(ids[b], ch)?;
    }
    for &(b, ch) in external_out {
        net.output(ch, ids[b], ch, None);
    }
    net.build()
}

/// Swaps the roles of the selected inputs and outputs. Returns the new model
/// and the condition number of the inverted feedthrough block.
///
/// New inputs are the selected outputs followed by the remaining inputs; new
/// outputs are the selected inputs followed by the remaining outputs.
pub fn invert_channels(
    sys: &StateSpace,
    in_names: &[&str],
    out_names: &[&str],
) -> Result<(StateSpace, f64)> {
    let mut sel_in = Vec::new();
    let mut in_ch_sel = Vec::new();
    for n in in_names {
        let r = sys.input_range(n)?;
        in_ch_sel.push(Channel::new(n, r.len()));
        sel_in.extend(r);
    }
    let mut sel_out = Vec::new();
    let mut out_ch_sel = Vec::new();
    for n in out_names {
        let r = sys.output_range(n)?;
        out_ch_sel.push(Channel::new(n, r.len()));
        sel_out.extend(r);
    }
    if sel_in.len() != sel_out.len() {
        return Err(Error::NonSquareSelection {
            inputs: sel_in.len(),
            outputs: sel_out.len(),
        });
    }
    let rest_in: Vec<usize> = (0..sys.n_inputs()).filter(|i| !sel_in.contains(i)).collect();
    let rest_out: Vec<usize> = (0..sys.n_outputs()).filter(|i| !sel_out.contains(i)).collect();
    let in_ch_rest: Vec<Channel> = sys
        .inputs
        .iter()
        .filter(|c| !in_names.contains(&c.name.as_str()))
        .cloned()
        .collect();
    let out_ch_rest: Vec<Channel> = sys
        .outputs
        .iter()
        .filter(|c| !out_names.contains(&c.name.as_str()))
        .cloned()
        .collect();

    let b1 = sys.b.select_columns(sel_in.iter());
    let b2 = sys.b.select_columns(rest_in.iter());
    let c1 = sys.c.select_rows(sel_out.iter());
    let c2 = sys.c.select_rows(rest_out.iter());
    let d11 = sys.d.select_rows(sel_out.iter()).select_columns(sel_in.iter());
    let d12 = sys.d.select_rows(sel_out.iter()).select_columns(rest_in.iter());
    let d21 = sys.d.select_rows(rest_out.iter()).select_columns(sel_in.iter());
    let d22 = sys.d.select_rows(rest_out.iter()).select_columns(rest_in.iter());

    let k = d11.nrows();
    let sv = singular_values(&d11);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if k == 0 { 1.0 } else { smax / smin };
    if k > 0 && (smin <= 1e-12 * smax || smax == 0.0) {
        return Err(Error::SingularDBlock { cond });
    }
    let di = d11
        .clone()
        .try_inverse()
        .ok_or(Error::SingularDBlock { cond })?;

    let a = &sys.a - &b1 * &di * &c1;
    let n = sys.n_states();
    let mut b = Mat::zeros(n, k + rest_in.len());
    b.columns_mut(0, k).copy_from(&(&b1 * &di));
    b.columns_mut(k, rest_in.len())
        .copy_from(&(&b2 - &b1 * &di * &d12));
    let mut c = Mat::zeros(k + rest_out.len(), n);
    c.rows_mut(0, k).copy_from(&(-&di * &c1));
    c.rows_mut(k, rest_out.len())
        .copy_from(&(&c2 - &d21 * &di * &c1));
    let mut d = Mat::zeros(k + rest_out.len(), k + rest_in.len());
    d.view_mut((0, 0), (k, k)).copy_from(&di);
    d.view_mut((0, k), (k, rest_in.len()))
        .copy_from(&(-&di * &d12));
    d.view_mut((k, 0), (rest_out.len(), k))
        .copy_from(&(&d21 * &di));
    d.view_mut((k, k), (rest_out.len(), rest_in.len()))
        .copy_from(&(&d22 - &d21 * &di * &d12));

    let mut inputs = out_ch_sel;
    inputs.extend(in_ch_rest);
    let mut outputs = in_ch_sel;
    outputs.extend(out_ch_rest);
    Ok((StateSpace::new(a, b, c, d, inputs, outputs)?, cond))
}

/// Lower LFT: closes `u = K y` where `K` has one input channel (width of `y`)
/// and one output channel (width of `u`).
pub fn lft_lower(plant: &StateSpace, k: &StateSpace, u: &str, y: &str) -> Result<StateSpace> {
    if k.inputs().len() != 1 || k.outputs().len() != 1 {
        return Err(Error::Dimension("controller must have one input and one output channel".into()));
    }
    let ur = plant.input_range(u)?;
    let yr = plant.output_range(y)?;
    if k.n_inputs() != yr.len() {
        return Err(width(y, yr.len(), k.n_inputs()));
    }
    if k.n_outputs() != ur.len() {
        return Err(width(u, ur.len(), k.n_outputs()));
    }
    let mut net = Network::new();
    let p = net.add("plant", plant.clone());
    let kb = net.add("controller", k.clone());
    let kin = k.inputs()[0].name.clone();
    let kout = k.outputs()[0].name.clone();
    net.connect(p, y, kb, &kin);
    net.connect(kb, &kout, p, u);
    for ch in plant.inputs() {
        if ch.name != u {
            net.pass_input(p, &ch.name)?;
        }
    }
    for ch in plant.outputs() {
        if ch.name != y {
            net.output(&ch.name, p, &ch.name, None);
        }
    }
    net.build()
}

/// Upper LFT with a repeated real scalar: closes `w = delta * z`.
pub fn lft_upper(plant: &StateSpace, delta: f64, w: &str, z: &str) -> Result<StateSpace> {
    let wr = plant.input_range(w)?;
    let zr = plant.output_range(z)?;
    if wr.len() != zr.len() {
        return Err(width(w, zr.len(), wr.len()));
    }
    let rest_in: Vec<usize> = (0..plant.n_inputs()).filter(|i| !wr.contains(i)).collect();
    let rest_out: Vec<usize> = (0..plant.n_outputs()).filter(|i| !zr.contains(i)).collect();
    let b1 = plant.b.columns(wr.start, wr.len()).into_owned();
    let b2 = plant.b.select_columns(rest_in.iter());
    let c1 = plant.c.rows(zr.start, zr.len()).into_owned();
    let c2 = plant.c.select_rows(rest_out.iter());
    let d11 = plant.d.view((zr.start, wr.start), (zr.len(), wr.len())).into_owned();
    let d12 = plant.d.rows(zr.start, zr.len()).select_columns(rest_in.iter());
    let d21 = plant.d.select_rows(rest_out.iter()).columns(wr.start, wr.len()).into_owned();
    let d22 = plant.d.select_rows(rest_out.iter()).select_columns(rest_in.iter());

    let k = wr.len();
    let l = Mat::identity(k, k) - &d11 * delta;
    let s = solve_loop(&l)? * delta;
    let a = &plant.a + &b1 * &s * &c1;
    let b = &b2 + &b1 * &s * &d12;
    let c = &c2 + &d21 * &s * &c1;
    let d = &d22 + &d21 * &s * &d12;
    let inputs = plant.inputs().iter().filter(|c| c.name != w).cloned().collect();
    let outputs = plant.outputs().iter().filter(|c| c.name != z).cloned().collect();
    StateSpace::new(a, b, c, d, inputs, outputs)
}

fn controllable_basis(a: &Mat, b: &Mat, tol: f64) -> Mat {
    let n = a.nrows();
    let a_scale = sigma_max_real(a).max(f64::MIN_POSITIVE);
    let b_scale = sigma_max_real(b).max(f64::MIN_POSITIVE);
    let mut basis = Mat::zeros(n, 0);
    let mut fresh = range_basis(b, tol * b_scale);
    while fresh.ncols() > 0 && basis.ncols() < n {
        let old = basis.ncols();
        basis = basis.insert_columns(old, fresh.ncols(), 0.0);
        basis.columns_mut(old, fresh.ncols()).copy_from(&fresh);
        let mut w = a * &fresh;
        for _ in 0..2 {
            let proj = &basis * (basis.transpose() * &w);
            w -= proj;
        }
        fresh = range_basis(&w, tol * a_scale);
    }
    basis
}

/// Restricts `sys` to one input/output channel pair, removes uncontrollable
/// and unobservable states, and checks the remainder is asymptotically stable.
pub fn minimal_stable_projection(sys: &StateSpace, input: &str, output: &str) -> Result<StateSpace> {
    let sub = sys.select(&[input], &[output])?;
    let n = sub.n_states();
    if n == 0 {
        return Ok(sub);
    }
    let tol = 1e-8;
    let dscale = balance_scaling(&sub.a);
    let dm = Mat::from_diagonal(&DVector::from_vec(dscale.clone()));
    let dinv = Mat::from_diagonal(&DVector::from_vec(dscale.iter().map(|x| 1.0 / x).collect()));
    let a0 = &dinv * &sub.a * &dm;
    let b0 = &dinv * &sub.b;
    let c0 = &sub.c * &dm;

    let vc = controllable_basis(&a0, &b0, tol);
    let a1 = vc.transpose() * &a0 * &vc;
    let b1 = vc.transpose() * &b0;
    let c1 = &c0 * &vc;
    let vo = controllable_basis(&a1.transpose(), &c1.transpose(), tol);
    let a2 = vo.transpose() * &a1 * &vo;
    let b2 = vo.transpose() * &b1;
    let c2 = &c1 * &vo;

    let out = StateSpace::new(a2, b2, c2, sub.d.clone(), sub.inputs.clone(), sub.outputs.clone())?;
    let abscissa = spectral_abscissa(&out.a)?;
    if abscissa >= -STABILITY_TOL {
        return Err(Error::MarginalModeObservable { real: abscissa });
    }
    Ok(out)
}

fn require_stable(sys: &StateSpace) -> Result<()> {
    if sys.n_states() == 0 {
        return Ok(());
    }
    let x = spectral_abscissa(&sys.a)?;
    if !(x < -STABILITY_TOL) {
        return Err(Error::UnstableSystem { abscissa: x });
    }
    Ok(())
}

fn sigma_at(sys: &StateSpace, w: f64) -> Result<f64> {
    Ok(sigma_max(&sys.transfer_at(Complex64::new(0.0, w))?))
}

/// H-infinity norm and the frequency where it is attained (`inf` when the
/// supremum is the feedthrough).
pub fn hinf_norm_peak(sys: &StateSpace) -> Result<(f64, f64)> {
    require_stable(sys)?;
    let d_norm = sigma_max_real(&sys.d);
    if sys.n_states() == 0 || sys.n_inputs() == 0 || sys.n_outputs() == 0 {
        return Ok((d_norm, f64::INFINITY));
    }
    let poles = eigenvalues(&sys.a)?;

    // initial lower bound from characteristic frequencies
    let mut cands: Vec<f64> = alloc::vec![0.0];
    let mut wmin = f64::INFINITY;
    let mut wmax: f64 = 0.0;
    for p in &poles {
        let m = p.norm();
        if m > 0.0 {
            cands.push(m);
            wmin = wmin.min(m);
            wmax = wmax.max(m);
        }
        if p.im > 0.0 {
            cands.push(p.im);
        }
    }
    if wmax > 0.0 {
        let g = FrequencyGrid::log_space(wmin / 100.0, wmax * 100.0, 60)?;
        cands.extend_from_slice(g.points());
    }
    let (mut lb, mut w_pk) = (d_norm, f64::INFINITY);
    for &w in &cands {
        let s = sigma_at(sys, w)?;
        if s > lb {
            lb = s;
            w_pk = w;
        }
    }
    if lb == 0.0 {
        return Ok((0.0, 0.0));
    }

    let rel = 1e-6;
    for _ in 0..100 {
        let gamma = (1.0 + 2.0 * rel) * lb;
        let ws = hamiltonian_imag_freqs(sys, gamma)?;
        if ws.is_empty() {
            break;
        }
        let mut probe = ws.clone();
        for p in ws.windows(2) {
            probe.push(0.5 * (p[0] + p[1]));
        }
        let mut improved = false;
        for &w in &probe {
            let s = sigma_at(sys, w)?;
            if s > lb * (1.0 + 1e-12) {
                lb = s;
                w_pk = w;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }

    if w_pk.is_finite() {
        let (s, w) = golden_refine(sys, w_pk, lb)?;
        if s > lb {
            lb = s;
            w_pk = w;
        }
    }
    Ok((lb, w_pk))
}

pub fn hinf_norm(sys: &StateSpace) -> Result<f64> {
    Ok(hinf_norm_peak(sys)?.0)
}

fn golden_refine(sys: &StateSpace, w0: f64, s0: f64) -> Result<(f64, f64)> {
    let (mut best_s, mut best_w) = (s0, w0);
    let span = if w0 > 0.0 { 0.02 * w0 } else { 1e-6 };
    let (mut lo, mut hi) = ((w0 - span).max(0.0), w0 + span);
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = sigma_at(sys, x1)?;
    let mut f2 = sigma_at(sys, x2)?;
    for _ in 0..80 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = sigma_at(sys, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = sigma_at(sys, x2)?;
        }
        if hi - lo < 1e-13 * (1.0 + w0) {
            break;
        }
    }
    for (s, w) in [(f1, x1), (f2, x2)] {
        if s > best_s {
            best_s = s;
            best_w = w;
        }
    }
    Ok((best_s, best_w))
}

/// Non-negative imaginary parts of the purely imaginary eigenvalues of the
/// Hamiltonian associated with level `gamma`, sorted ascending.
fn hamiltonian_imag_freqs(sys: &StateSpace, gamma: f64) -> Result<Vec<f64>> {
    let (a, b, c, d) = (&sys.a, &sys.b, &sys.c, &sys.d);
    let n = a.nrows();
    let m = b.ncols();
    let p = c.nrows();
    let r = Mat::identity(m, m) * (gamma * gamma) - d.transpose() * d;
    let ri = r
        .try_inverse()
        .ok_or_else(|| Error::EigenFailure("gamma below feedthrough norm".into()))?;
    let ae = a + b * &ri * d.transpose() * c;
    let q = c.transpose() * (Mat::identity(p, p) + d * &ri * d.transpose()) * c;
    let g = b * &ri * b.transpose();
    let mut h = Mat::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&ae);
    h.view_mut((0, n), (n, n)).copy_from(&g);
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-ae.transpose()));
    let ev = eigenvalues(&h)?;
    let mut ws: Vec<f64> = ev
        .iter()
        .filter(|l| l.im >= 0.0 && l.re.abs() <= 1e-7 * (1.0 + l.norm()))
        .map(|l| l.im)
        .collect();
    ws.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    Ok(ws)
}

/// H2 norm via the controllability Gramian.
pub fn h2_norm(sys: &StateSpace) -> Result<f64> {
    let max_abs = sys.d.amax();
    if max_abs > 1e-12 {
        return Err(Error::NonzeroFeedthrough { max_abs });
    }
    require_stable(sys)?;
    if sys.n_states() == 0 {
        return Ok(0.0);
    }
    let q = &sys.b * sys.b.transpose();
    let p = lyapunov(&sys.a, &q)?;
    let t = (&sys.c * p * sys.c.transpose()).trace();
    Ok(t.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn siso(a: f64, b: f64, c: f64, d: f64) -> StateSpace {
        StateSpace::new(
            Mat::from_element(1, 1, a),
            Mat::from_element(1, 1, b),
            Mat::from_element(1, 1, c),
            Mat::from_element(1, 1, d),
            channels(&[("u", 1)]),
            channels(&[("y", 1)]),
        )
        .unwrap()
    }

    fn gain(k: f64, i: &str, o: &str) -> StateSpace {
        StateSpace::gain(Mat::from_element(1, 1, k), channels(&[(i, 1)]), channels(&[(o, 1)])).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions_and_duplicates() {
        let r = StateSpace::new(
            Mat::zeros(2, 2),
            Mat::zeros(1, 1),
            Mat::zeros(1, 2),
            Mat::zeros(1, 1),
            channels(&[("u", 1)]),
            channels(&[("y", 1)]),
        );
        assert!(matches!(r, Err(Error::Dimension(_))));
        let r = StateSpace::gain(Mat::zeros(1, 2), channels(&[("u", 1), ("u", 1)]), channels(&[("y", 1)]));
        assert!(matches!(r, Err(Error::DuplicateChannel(_))));
    }

    #[test]
    fn series_gains_multiply() {
        let g = interconnect(
            &[gain(2.0, "u", "y"), gain(3.0, "u", "y")],
            &[(0, "y", 1, "u")],
            &[(0, "u")],
            &[(1, "y")],
        )
        .unwrap();
        assert_eq!(g.n_states(), 0);
        assert!((g.d()[(0, 0)] - 6.0).abs() < 1e-15);
    }

    #[test]
    fn integrator_with_unity_negative_feedback() {
        let integ = siso(0.0, 1.0, 1.0, 0.0);
        let mut net = Network::new();
        let i = net.add("int", integ);
        let k = net.add("neg", gain(-1.0, "e", "f"));
        net.connect(i, "y", k, "e");
        net.input("r", 1, &[(i, "u", None)]);
        net.connect(k, "f", i, "u");
        net.output("y", i, "y", None);
        let cl = net.build().unwrap();
        for w in [0.1, 1.0, 7.0] {
            let g = cl.transfer_at(Complex64::new(0.0, w)).unwrap()[(0, 0)];
            let exact = Complex64::new(1.0, 0.0) / Complex64::new(1.0, w);
            assert!((g - exact).norm() < 1e-14);
        }
    }

    #[test]
    fn width_mismatch_and_unknown_channel() {
        let three = StateSpace::gain(Mat::identity(3, 3), channels(&[("u", 3)]), channels(&[("y", 3)])).unwrap();
        let six = StateSpace::gain(Mat::identity(6, 6), channels(&[("u", 6)]), channels(&[("y", 6)])).unwrap();
        let r = interconnect(&[three.clone(), six.clone()], &[(0, "y", 1, "u")], &[], &[]);
        assert!(matches!(r, Err(Error::WidthMismatch { .. })));
        let r = interconnect(&[three, six], &[(0, "nope", 1, "u")], &[], &[]);
        assert!(matches!(r, Err(Error::UnknownChannel(_))));
    }

    #[test]
    fn ill_posed_loop_detected() {
        let mut net = Network::new();
        let a = net.add("a", gain(1.0, "u", "y"));
        net.connect(a, "y", a, "u");
        assert!(matches!(net.build(), Err(Error::IllPosedLoop { .. })));
    }

    #[test]
    fn static_inversion() {
        let (inv, cond) = invert_channels(&gain(2.0, "u", "y"), &["u"], &["y"]).unwrap();
        assert!((inv.d()[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(cond, 1.0);
        assert_eq!(inv.inputs()[0].name, "y");
    }

    #[test]
    fn strictly_proper_inversion_fails() {
        let r = invert_channels(&siso(-1.0, 1.0, 1.0, 0.0), &["u"], &["y"]);
        assert!(matches!(r, Err(Error::SingularDBlock { .. })));
    }

    #[test]
    fn lft_lower_zero_gain_keeps_plant() {
        let plant = StateSpace::new(
            Mat::from_row_slice(1, 1, &[-2.0]),
            Mat::from_row_slice(1, 2, &[1.0, 3.0]),
            Mat::from_row_slice(2, 1, &[1.0, 4.0]),
            Mat::from_row_slice(2, 2, &[0.0, 0.0, 0.5, 0.0]),
            channels(&[("w", 1), ("u", 1)]),
            channels(&[("z", 1), ("y", 1)]),
        )
        .unwrap();
        let cl = lft_lower(&plant, &gain(0.0, "y", "u"), "u", "y").unwrap();
        let reference = plant.select(&["w"], &["z"]).unwrap();
        for w in [0.0, 0.3, 3.0] {
            let s = Complex64::new(0.0, w);
            assert!((cl.transfer_at(s).unwrap() - reference.transfer_at(s).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn lft_lower_pd_on_double_integrator() {
        // x = [pos, vel], u force, y = [pos, vel]
        let plant = StateSpace::new(
            Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            Mat::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]),
            Mat::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
            Mat::zeros(3, 2),
            channels(&[("d", 1), ("u", 1)]),
            channels(&[("pos", 1), ("y", 2)]),
        )
        .unwrap();
        let (k, c) = (4.0, 3.0);
        let kc = StateSpace::gain(Mat::from_row_slice(1, 2, &[-k, -c]), channels(&[("m", 2)]), channels(&[("f", 1)])).unwrap();
        let cl = lft_lower(&plant, &kc, "u", "y").unwrap();
        let mut ev: Vec<f64> = cl.poles().unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // s^2 + 3 s + 4 ... complex pair with real part -1.5
        assert!((ev[0] + 1.5).abs() < 1e-12 && (ev[1] + 1.5).abs() < 1e-12);
        let bad = StateSpace::gain(Mat::zeros(1, 3), channels(&[("m", 3)]), channels(&[("f", 1)])).unwrap();
        assert!(matches!(lft_lower(&plant, &bad, "u", "y"), Err(Error::WidthMismatch { .. })));
    }

    #[test]
    fn lft_upper_zero_and_ill_posed() {
        let plant = StateSpace::new(
            Mat::from_row_slice(1, 1, &[-1.0]),
            Mat::from_row_slice(1, 2, &[1.0, 1.0]),
            Mat::from_row_slice(2, 1, &[1.0, 1.0]),
            Mat::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]),
            channels(&[("w", 1), ("u", 1)]),
            channels(&[("z", 1), ("y", 1)]),
        )
        .unwrap();
        let nominal = lft_upper(&plant, 0.0, "w", "z").unwrap();
        assert_eq!(nominal.inputs().len(), 1);
        assert!((nominal.a()[(0, 0)] + 1.0).abs() < 1e-15);
        assert!(matches!(lft_upper(&plant, 2.0, "w", "z"), Err(Error::IllPosedLoop { .. })));
    }

    #[test]
    fn frequency_response_examples() {
        let g = freq_response(&siso(-1.0, 1.0, 1.0, 0.0), &FrequencyGrid::new(alloc::vec![1.0]).unwrap()).unwrap();
        assert!((g.values[0][(0, 0)].norm() - 1.0 / 2.0_f64.sqrt()).abs() < 1e-14);
        let integ = freq_response(&siso(0.0, 1.0, 1.0, 0.0), &FrequencyGrid::new(alloc::vec![0.5, 2.0]).unwrap()).unwrap();
        assert!((integ.values[0][(0, 0)].norm() - 2.0).abs() < 1e-14);
        assert!((integ.values[1][(0, 0)].norm() - 0.5).abs() < 1e-14);
        let osc = StateSpace::new(
            Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            Mat::from_row_slice(2, 1, &[0.0, 1.0]),
            Mat::from_row_slice(1, 2, &[1.0, 0.0]),
            Mat::zeros(1, 1),
            channels(&[("u", 1)]),
            channels(&[("y", 1)]),
        )
        .unwrap();
        let r = freq_response(&osc, &FrequencyGrid::new(alloc::vec![0.5, 1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(r.skipped, alloc::vec![1.0]);
        assert_eq!(r.omegas.len(), 2);
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(alloc::vec![]).is_err());
        assert!(FrequencyGrid::new(alloc::vec![1.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(alloc::vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn stability_examples() {
        assert!(is_stable(&siso(-1.0, 1.0, 1.0, 0.0)).0);
        assert!(!is_stable(&siso(0.0, 1.0, 1.0, 0.0)).0);
    }

    #[test]
    fn projection_drops_hidden_marginal_state() {
        let sys = StateSpace::new(
            Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]),
            Mat::from_row_slice(2, 1, &[1.0, 1.0]),
            Mat::from_row_slice(1, 2, &[1.0, 0.0]),
            Mat::zeros(1, 1),
            channels(&[("u", 1)]),
            channels(&[("y", 1)]),
        )
        .unwrap();
        let p = minimal_stable_projection(&sys, "u", "y").unwrap();
        assert_eq!(p.n_states(), 1);
        assert!((p.a()[(0, 0)] + 1.0).abs() < 1e-12);

        let dbl = StateSpace::new(
            Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            Mat::from_row_slice(2, 1, &[0.0, 1.0]),
            Mat::from_row_slice(1, 2, &[1.0, 0.0]),
            Mat::zeros(1, 1),
            channels(&[("u", 1)]),
            channels(&[("y", 1)]),
        )
        .unwrap();
        assert!(matches!(
            minimal_stable_projection(&dbl, "u", "y"),
            Err(Error::MarginalModeObservable { .. })
        ));
    }

    #[test]
    fn norm_examples() {
        let lag = siso(-1.0, 1.0, 1.0, 0.0);
        assert!((hinf_norm(&lag).unwrap() - 1.0).abs() < 1e-9);
        assert!((h2_norm(&lag).unwrap() - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!((h2_norm(&lag.clone().scaled(3.0)).unwrap() - 3.0 * 0.5_f64.sqrt()).abs() < 1e-12);
        assert!(matches!(hinf_norm(&siso(1.0, 1.0, 1.0, 0.0)), Err(Error::UnstableSystem { .. })));
        assert!(matches!(h2_norm(&siso(-1.0, 1.0, 1.0, 0.1)), Err(Error::NonzeroFeedthrough { .. })));

        let (w0, xi) = (3.0, 0.005);
        let res = StateSpace::new(
            Mat::from_row_slice(2, 2, &[0.0, 1.0, -w0 * w0, -2.0 * xi * w0]),
            Mat::from_row_slice(2, 1, &[0.0, w0 * w0]),
            Mat::from_row_slice(1, 2, &[1.0, 0.0]),
            Mat::zeros(1, 1),
            channels(&[("u", 1)]),
            channels(&[("y", 1)]),
        )
        .unwrap();
        let exact = 1.0 / (2.0 * xi * (1.0 - xi * xi).sqrt());
        let h = hinf_norm(&res).unwrap();
        assert!((h - exact).abs() / exact < 1e-6, "{h} vs {exact}");
    }
}
