//! Assembly path planning: node graphs over `(tile, gripping arm)` states,
//! trajectory gridding of each edge, norm-based edge costs and shortest-path
//! search, up to the full pickup/assemble sequence.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::linss::{h2_norm, hinf_norm, lft_upper, minimal_stable_projection, StateSpace};
use crate::modal::{adjacency, TileLayout};
use crate::robot::{chain_ik_frame, quintic_waypoints, JointVector, N_JOINTS};
use crate::robust::mu_real_repeated;
use crate::scenario::{robot_com, walking_chain, AssemblyState, Scenario, ScenarioConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphKind {
    Pickup,
    Assemble,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Grip { tile: usize, arm: usize },
    /// Stack for pickup graphs, target cell for assemble graphs.
    Action,
}

/// Directed graph for one action at structure size `n`. Node `2(t-1)+(a-1)`
/// is "arm `a` grips tile `t`", node `2n` is the action node.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeGraph {
    pub kind: GraphKind,
    pub n: usize,
    /// `(2n+1)^2`, 1 where an edge exists.
    pub adjacency: Mat,
}

pub fn node_index(tile: usize, arm: usize) -> usize {
    2 * (tile - 1) + (arm - 1)
}

impl NodeGraph {
    pub fn len(&self) -> usize {
        2 * self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn action_node(&self) -> usize {
        2 * self.n
    }

    pub fn node(&self, i: usize) -> Node {
        if i == self.action_node() {
            Node::Action
        } else {
            Node::Grip {
                tile: i / 2 + 1,
                arm: i % 2 + 1,
            }
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[(i, j)] != 0.0
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Carried-tile flag while walking in this graph.
    pub fn carrying(&self) -> bool {
        self.kind == GraphKind::Assemble
    }

    /// Robot action for the edge `i -> j`.
    pub fn edge(&self, i: usize, j: usize) -> Option<Edge> {
        if !self.has_edge(i, j) {
            return None;
        }
        let Node::Grip { tile, arm } = self.node(i) else {
            return None;
        };
        Some(match self.node(j) {
            Node::Grip { tile: t2, arm: a2 } => Edge {
                kind: ActionKind::Walk,
                n: self.n,
                carrying: self.carrying(),
                from: (tile, arm),
                to: Some((t2, a2)),
            },
            Node::Action => Edge {
                kind: match self.kind {
                    GraphKind::Pickup => ActionKind::Pickup,
                    GraphKind::Assemble => ActionKind::Assemble,
                },
                n: self.n,
                carrying: self.carrying(),
                from: (tile, arm),
                to: None,
            },
        })
    }

    /// Weight matrix, `inf` where there is no edge.
    pub fn weights(&self, mut w: impl FnMut(&Edge) -> f64) -> Mat {
        let mut m = Mat::from_element(self.len(), self.len(), f64::INFINITY);
        for (i, j) in self.edges() {
            let e = self.edge(i, j).expect("listed edge");
            m[(i, j)] = w(&e);
        }
        m
    }
}

/// Tiles the robot can serve the stack from: centre within `reach` of the
/// stack top (structure frame).
pub fn stack_tiles(layout: &TileLayout, n: usize, stack: &Vector3<f64>, reach: f64) -> Vec<usize> {
    (1..=n.min(layout.len()))
        .filter(|&t| {
            layout
                .tile_center(t)
                .map_or(false, |c| (c - stack).norm() <= reach + 1e-12)
        })
        .collect()
}

/// Pickup and assemble graphs with `n` tiles assembled.
pub fn build_node_graphs(
    layout: &TileLayout,
    n: usize,
    stack: &Vector3<f64>,
    reach: f64,
) -> Result<(NodeGraph, NodeGraph)> {
    if n == 0 || n > layout.len() {
        return Err(Error::LayoutError(alloc::format!(
            "n = {n} outside 1..={}",
            layout.len()
        )));
    }
    let size = 2 * n + 1;
    let mut walk = Mat::zeros(size, size);
    for a in 1..=n {
        for b in 1..=n {
            if a == b {
                continue;
            }
            let (ca, cb) = (layout.cell(a).expect("in layout"), layout.cell(b).expect("in layout"));
            if adjacency(ca, cb).is_none() {
                continue;
            }
            for x in 1..=2 {
                walk[(node_index(a, x), node_index(b, 3 - x))] = 1.0;
            }
        }
    }
    let mut pick = walk.clone();
    for t in stack_tiles(layout, n, stack, reach) {
        for x in 1..=2 {
            pick[(node_index(t, x), 2 * n)] = 1.0;
        }
    }
    let mut asm = walk;
    if let Some(target) = layout.cell(n + 1) {
        for t in 1..=n {
            if adjacency(layout.cell(t).expect("in layout"), target).is_some() {
                for x in 1..=2 {
                    asm[(node_index(t, x), 2 * n)] = 1.0;
                }
            }
        }
    }
    Ok((
        NodeGraph {
            kind: GraphKind::Pickup,
            n,
            adjacency: pick,
        },
        NodeGraph {
            kind: GraphKind::Assemble,
            n,
            adjacency: asm,
        },
    ))
}

/// All `2N` graphs of an assembly of `N` tiles, `n = 1..=N`, pickup first.
/// The two graphs at `n = N` are never traversed.
pub fn assembly_graphs(cfg: &ScenarioConfig) -> Result<Vec<NodeGraph>> {
    let stack = cfg.stack_point();
    let mut out = Vec::with_capacity(2 * cfg.n_total);
    for n in 1..=cfg.n_total {
        let (p, a) = build_node_graphs(&cfg.layout, n, &stack, cfg.stack_reach)?;
        out.push(p);
        out.push(a);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    Walk,
    Pickup,
    Assemble,
}

impl ActionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ActionKind::Walk => "walk",
            ActionKind::Pickup => "pickup",
            ActionKind::Assemble => "assemble",
        }
    }
}

/// One robot motion: home, action pose, home.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub kind: ActionKind,
    pub n: usize,
    pub carrying: bool,
    /// `(tile, gripping arm)` before the motion.
    pub from: (usize, usize),
    /// Walk destination.
    pub to: Option<(usize, usize)>,
}

/// Assembly states before and after the action, the reaching arm, and the
/// target of the reaching arm's `J0` in the gripping arm's base frame.
pub struct EdgeGeometry {
    pub pre: AssemblyState,
    pub post: AssemblyState,
    pub reaching_arm: usize,
    pub target: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

pub fn edge_geometry(cfg: &ScenarioConfig, edge: &Edge) -> Result<EdgeGeometry> {
    let (a, x) = edge.from;
    let center = |t: usize| {
        cfg.layout
            .tile_center(t)
            .ok_or(Error::MissingStructureData { n: edge.n, j: t })
    };
    let ca = center(a)?;
    let pre = AssemblyState {
        n: edge.n,
        j: a,
        arm: x,
        carrying: edge.carrying,
    };
    let (post, reaching_arm, target, rotation) = match edge.kind {
        ActionKind::Walk => {
            let (b, y) = edge.to.ok_or_else(|| Error::StateInvalid("walk edge without destination".into()))?;
            if y == x {
                return Err(Error::StateInvalid("walk edge must flip the gripping arm".into()));
            }
            (
                AssemblyState { j: b, arm: y, ..pre },
                y,
                center(b)? - ca,
                Matrix3::identity(),
            )
        }
        ActionKind::Pickup => (
            AssemblyState { carrying: true, ..pre },
            3,
            cfg.stack_point() - ca,
            cfg.structure_frame.matrix().transpose() * cfg.stack_frame.matrix(),
        ),
        ActionKind::Assemble => (
            AssemblyState {
                n: edge.n + 1,
                carrying: false,
                ..pre
            },
            3,
            center(edge.n + 1)? - ca,
            Matrix3::identity(),
        ),
    };
    pre.validate(cfg.n_total)?;
    post.validate(cfg.n_total)?;
    Ok(EdgeGeometry {
        pre,
        post,
        reaching_arm,
        target,
        rotation,
    })
}

/// Joint angles of all three arms at the action pose.
pub fn action_pose(cfg: &ScenarioConfig, edge: &Edge) -> Result<[JointVector; 3]> {
    let g = edge_geometry(cfg, edge)?;
    let x = g.pre.arm;
    let chain = walking_chain(cfg, x, g.reaching_arm)?;
    // the chain is symmetric about the gripping arm's base yaw: seed with
    // quarter-turn yaws, the reaching arm's base yaw undoing the turn
    let mut seeds = Vec::new();
    for k in 0..4 {
        let h = core::f64::consts::FRAC_PI_2 * k as f64;
        for back in [h, -h] {
            let mut s = [0.0; 2 * N_JOINTS];
            s[0] = h;
            s[N_JOINTS] = back;
            if !seeds.contains(&s) {
                seeds.push(s);
            }
        }
    }
    let mut last = None;
    let mut found = None;
    for seed in &seeds {
        match chain_ik_frame(&chain, &g.target, &g.rotation, seed) {
            Ok(q) => {
                found = Some(q);
                break;
            }
            Err(e) => last = Some(e),
        }
    }
    let q = match found {
        Some(q) => q,
        None => return Err(last.expect("at least one seed")),
    };
    let mut out = [JointVector::zero(); 3];
    out[x - 1] = JointVector::new(core::array::from_fn(|k| q[k]))?;
    out[g.reaching_arm - 1] = JointVector::new(core::array::from_fn(|k| q[N_JOINTS + k]))?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub state: AssemblyState,
    pub q: [JointVector; 3],
    /// 1 or 2.
    pub leg: u8,
}

/// The `2z` closed loops along one edge.
#[derive(Clone, Debug)]
pub struct EdgeModelArray {
    pub edge: Edge,
    pub action_q: [JointVector; 3],
    pub points: Vec<GridPoint>,
    pub open: Vec<StateSpace>,
    pub closed: Vec<StateSpace>,
}

impl EdgeModelArray {
    pub fn leg1(&self) -> &[StateSpace] {
        &self.open[..self.open.len() / 2]
    }

    pub fn leg2(&self) -> &[StateSpace] {
        &self.open[self.open.len() / 2..]
    }
}

pub fn edge_grid_points(cfg: &ScenarioConfig, edge: &Edge, z: usize) -> Result<(Vec<GridPoint>, [JointVector; 3])> {
    let g = edge_geometry(cfg, edge)?;
    let qa = action_pose(cfg, edge)?;
    let home = [JointVector::zero(); 3];
    let mut out_legs: [Vec<[JointVector; 3]>; 2] = [Vec::new(), Vec::new()];
    for (leg, (from, to)) in [(home, qa), (qa, home)].iter().enumerate() {
        let per_arm: Vec<Vec<JointVector>> = (0..3)
            .map(|k| quintic_waypoints(&from[k], &to[k], z))
            .collect::<Result<_>>()?;
        out_legs[leg] = (0..z).map(|i| [per_arm[0][i], per_arm[1][i], per_arm[2][i]]).collect();
    }
    let mut points = Vec::with_capacity(2 * z);
    for q in &out_legs[0] {
        points.push(GridPoint {
            state: g.pre,
            q: *q,
            leg: 1,
        });
    }
    for q in &out_legs[1] {
        points.push(GridPoint {
            state: g.post,
            q: *q,
            leg: 2,
        });
    }
    Ok((points, qa))
}

/// Leg 1 runs home to the action pose in the pre-action state, leg 2 back
/// home in the post-action state; `z` waypoints each.
pub fn grid_edge_models(sc: &Scenario, edge: &Edge, z: usize) -> Result<EdgeModelArray> {
    let (points, action_q) = edge_grid_points(&sc.cfg, edge, z)?;
    let mut open = Vec::with_capacity(points.len());
    let mut closed = Vec::with_capacity(points.len());
    for p in &points {
        let h = sc.open_loop(&p.state, &p.q)?;
        closed.push(crate::scenario::close_loop(&h, &sc.k_att)?);
        open.push(h);
    }
    Ok(EdgeModelArray {
        edge: *edge,
        action_q,
        points,
        open,
        closed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CostKind {
    /// H-infinity norm of `W_ext -> omega_dot_G`.
    HinfWrenchToOmegaDot,
    /// H2 norm of `W_ext -> theta_G`.
    H2WrenchToTheta,
    /// H-infinity norm of the input sensitivity `d_t -> e_t`.
    HinfInputSens,
    /// Robust-stability margin against the solar-array frequency uncertainty.
    MuRS,
}

impl CostKind {
    pub const ALL: [CostKind; 4] = [
        CostKind::HinfWrenchToOmegaDot,
        CostKind::H2WrenchToTheta,
        CostKind::HinfInputSens,
        CostKind::MuRS,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CostKind::HinfWrenchToOmegaDot => "hinf-wrench",
            CostKind::H2WrenchToTheta => "h2-theta",
            CostKind::HinfInputSens => "hinf-isens",
            CostKind::MuRS => "mu",
        }
    }

    pub fn from_name(s: &str) -> Option<CostKind> {
        CostKind::ALL.iter().copied().find(|k| k.name() == s)
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostSpec {
    pub kind: CostKind,
    /// Any grid point above this value makes the edge cost infinite.
    pub hard_cap: Option<f64>,
}

impl CostSpec {
    pub fn new(kind: CostKind) -> Self {
        CostSpec { kind, hard_cap: None }
    }

    pub fn with_cap(kind: CostKind, cap: f64) -> Result<Self> {
        if !(cap > 0.0) {
            return Err(Error::InvalidBound(cap));
        }
        Ok(CostSpec { kind, hard_cap: Some(cap) })
    }

    /// Sum over grid points, `inf` if any point exceeds the cap.
    pub fn total(&self, per_point: &[f64]) -> f64 {
        if let Some(cap) = self.hard_cap {
            if per_point.iter().any(|v| *v > cap) {
                return f64::INFINITY;
            }
        }
        per_point.iter().sum()
    }
}

/// Search range for the real destabilizing scalar of the mu cost.
pub const MU_DELTA_MAX: f64 = 10.0;

/// One closed loop's metric, uncertainty nominal except for mu.
pub fn system_metric(cl: &StateSpace, kind: CostKind) -> Result<f64> {
    if kind == CostKind::MuRS {
        return Ok(mu_real_repeated(cl, MU_DELTA_MAX)?.mu_lower);
    }
    let nominal = if cl.has_input("w_omega") {
        lft_upper(cl, 0.0, "w_omega", "z_omega")?
    } else {
        cl.clone()
    };
    match kind {
        CostKind::HinfWrenchToOmegaDot => hinf_norm(&minimal_stable_projection(&nominal, "W_ext", "omega_dot_G")?),
        CostKind::H2WrenchToTheta => h2_norm(&minimal_stable_projection(&nominal, "W_ext", "theta_G")?),
        CostKind::HinfInputSens => hinf_norm(&minimal_stable_projection(&nominal, "d_t", "e_t")?),
        CostKind::MuRS => unreachable!(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeCost {
    pub total: f64,
    pub per_point: Vec<f64>,
}

pub fn edge_cost(array: &EdgeModelArray, spec: &CostSpec) -> Result<EdgeCost> {
    let per_point = array
        .closed
        .iter()
        .map(|c| system_metric(c, spec.kind))
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeCost {
        total: spec.total(&per_point),
        per_point,
    })
}

/// Everything the planner needs about one edge, all metrics at once.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRecord {
    pub edge: Edge,
    /// `None` when the action pose has no inverse-kinematics solution.
    pub action_q: Option<[JointVector; 3]>,
    pub points: Vec<GridPoint>,
    /// Robot centre of mass to `G` per grid point.
    pub robot_distance: Vec<f64>,
    /// Indexed like [`CostKind::ALL`].
    pub metrics: [Vec<f64>; 4],
    pub mu_upper: Vec<f64>,
}

impl EdgeRecord {
    pub fn feasible(&self) -> bool {
        self.action_q.is_some()
    }

    pub fn metric(&self, kind: CostKind) -> &[f64] {
        &self.metrics[kind.index()]
    }

    pub fn cost(&self, spec: &CostSpec) -> f64 {
        if !self.feasible() {
            return f64::INFINITY;
        }
        spec.total(self.metric(spec.kind))
    }
}

pub fn evaluate_edge(sc: &Scenario, edge: &Edge) -> Result<EdgeRecord> {
    let array = match grid_edge_models(sc, edge, sc.cfg.z) {
        Ok(a) => a,
        Err(Error::IkNotConverged { .. }) => {
            return Ok(EdgeRecord {
                edge: *edge,
                action_q: None,
                points: Vec::new(),
                robot_distance: Vec::new(),
                metrics: Default::default(),
                mu_upper: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let mut metrics: [Vec<f64>; 4] = Default::default();
    let mut mu_upper = Vec::with_capacity(array.closed.len());
    for cl in &array.closed {
        for kind in [CostKind::HinfWrenchToOmegaDot, CostKind::H2WrenchToTheta, CostKind::HinfInputSens] {
            metrics[kind.index()].push(system_metric(cl, kind)?);
        }
        let mu = mu_real_repeated(cl, MU_DELTA_MAX)?;
        metrics[CostKind::MuRS.index()].push(mu.mu_lower);
        mu_upper.push(mu.mu_upper);
    }
    let robot_distance = array
        .points
        .iter()
        .map(|p| robot_com(&sc.cfg, &p.state, &p.q).map(|c| c.norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeRecord {
        edge: *edge,
        action_q: Some(array.action_q),
        points: array.points,
        robot_distance,
        metrics,
        mu_upper,
    })
}

pub type EdgeTable = BTreeMap<Edge, EdgeRecord>;

/// Every edge of the graphs traversed by a full assembly (`n < N`).
pub fn assembly_edges(cfg: &ScenarioConfig) -> Result<Vec<Edge>> {
    let mut out = Vec::new();
    for g in assembly_graphs(cfg)? {
        if g.n >= cfg.n_total {
            continue;
        }
        for (i, j) in g.edges() {
            out.push(g.edge(i, j).expect("listed edge"));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Serial edge evaluation; callers with threads can fill the table themselves.
pub fn evaluate_edges(sc: &Scenario, edges: &[Edge]) -> Result<EdgeTable> {
    let mut t = EdgeTable::new();
    for e in edges {
        t.insert(*e, evaluate_edge(sc, e)?);
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Dijkstra,
    /// Every finite edge counts as one hop.
    BfsUnit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub nodes: Vec<usize>,
    /// Sum of the weights along the path.
    pub weight: f64,
    pub hops: usize,
}

#[derive(Clone, Debug, PartialEq)]
struct Label {
    key: f64,
    hops: usize,
    nodes: Vec<usize>,
}

impl Label {
    fn better(&self, other: &Label) -> bool {
        (self.key, self.hops) < (other.key, other.hops)
            || (self.key == other.key && self.hops == other.hops && self.nodes < other.nodes)
    }
}

/// Shortest path on a weight matrix (`inf` = no edge). Ties go to fewer hops,
/// then to the lexicographically smaller node sequence.
pub fn shortest_path(weights: &Mat, src: usize, dst: usize, mode: SearchMode) -> Result<Path> {
    let n = weights.nrows();
    if weights.ncols() != n || src >= n || dst >= n {
        return Err(Error::Dimension(alloc::format!(
            "graph of {}x{} with src {src}, dst {dst}",
            weights.nrows(),
            weights.ncols()
        )));
    }
    if weights.iter().any(|w| *w < 0.0 || w.is_nan()) {
        return Err(Error::InvalidBound(weights.min()));
    }
    let mut labels: Vec<Option<Label>> = vec![None; n];
    let mut done = vec![false; n];
    labels[src] = Some(Label {
        key: 0.0,
        hops: 0,
        nodes: vec![src],
    });
    loop {
        let mut pick: Option<usize> = None;
        for i in 0..n {
            if done[i] {
                continue;
            }
            if let Some(l) = &labels[i] {
                if pick.map_or(true, |p| l.better(labels[p].as_ref().expect("picked"))) {
                    pick = Some(i);
                }
            }
        }
        let Some(u) = pick else { break };
        done[u] = true;
        if u == dst {
            break;
        }
        let lu = labels[u].clone().expect("picked");
        for v in 0..n {
            let w = weights[(u, v)];
            if done[v] || u == v || !w.is_finite() {
                continue;
            }
            let step = match mode {
                SearchMode::Dijkstra => w,
                SearchMode::BfsUnit => 1.0,
            };
            let mut nodes = lu.nodes.clone();
            nodes.push(v);
            let cand = Label {
                key: lu.key + step,
                hops: lu.hops + 1,
                nodes,
            };
            if labels[v].as_ref().map_or(true, |l| cand.better(l)) {
                labels[v] = Some(cand);
            }
        }
    }
    let l = labels[dst].take().filter(|_| done[dst]).ok_or(Error::Unreachable { src, dst })?;
    let weight = l.nodes.windows(2).map(|p| weights[(p[0], p[1])]).sum();
    Ok(Path {
        hops: l.nodes.len() - 1,
        nodes: l.nodes,
        weight,
    })
}

/// One traversed edge of a plan.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanStep {
    /// Position of the graph in the assembly sequence.
    pub graph: usize,
    pub graph_kind: GraphKind,
    pub edge: Edge,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub grid_index: usize,
    pub value: f64,
    pub edge_id: usize,
    pub action: ActionKind,
    pub leg: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub cumulative: f64,
    pub series: Vec<MetricRow>,
    pub mean_robot_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyPlan {
    pub spec: CostSpec,
    pub graphs: Vec<NodeGraph>,
    pub weighted: Plan,
    pub unweighted: Plan,
}

impl AssemblyPlan {
    /// Relative saving of the weighted plan over the unit-weight plan.
    pub fn gap(&self) -> f64 {
        (self.unweighted.cumulative - self.weighted.cumulative) / self.unweighted.cumulative
    }
}

/// Graphs traversed by a full assembly, in order: pickup and assemble for
/// `n = 1..N-1`.
fn traversed(graphs: &[NodeGraph], n_total: usize) -> Vec<&NodeGraph> {
    graphs.iter().filter(|g| g.n < n_total).collect()
}

struct Layered {
    weights: Mat,
    /// Global edge id to plan edge.
    edges: BTreeMap<(usize, usize), (usize, Edge)>,
    start: usize,
    end: usize,
}

fn layered(layers: &[&NodeGraph], table: &EdgeTable, spec: &CostSpec, start: (usize, usize)) -> Layered {
    let mut offsets = Vec::with_capacity(layers.len());
    let mut size = 0;
    for g in layers {
        offsets.push(size);
        size += g.len();
    }
    let end = size;
    let mut weights = Mat::from_element(size + 1, size + 1, f64::INFINITY);
    let mut edges = BTreeMap::new();
    for (k, g) in layers.iter().enumerate() {
        for (i, j) in g.edges() {
            let e = g.edge(i, j).expect("listed edge");
            let w = table.get(&e).map_or(f64::INFINITY, |r| r.cost(spec));
            let from = offsets[k] + i;
            let to = if j == g.action_node() {
                // the robot stays where it performed the action
                if k + 1 < layers.len() {
                    offsets[k + 1] + i
                } else {
                    end
                }
            } else {
                offsets[k] + j
            };
            weights[(from, to)] = w;
            edges.insert((from, to), (k, e));
        }
    }
    Layered {
        weights,
        edges,
        start: node_index(start.0, start.1),
        end,
    }
}

fn plan_from(path: &Path, lg: &Layered, layers: &[&NodeGraph], table: &EdgeTable, spec: &CostSpec) -> Plan {
    let mut steps = Vec::new();
    let mut series = Vec::new();
    let mut dist = Vec::new();
    for (id, p) in path.nodes.windows(2).enumerate() {
        let (k, e) = lg.edges[&(p[0], p[1])];
        let rec = &table[&e];
        steps.push(PlanStep {
            graph: k,
            graph_kind: layers[k].kind,
            edge: e,
            cost: rec.cost(spec),
        });
        for (i, v) in rec.metric(spec.kind).iter().enumerate() {
            series.push(MetricRow {
                grid_index: series.len(),
                value: *v,
                edge_id: id,
                action: e.kind,
                leg: rec.points[i].leg,
            });
        }
        dist.extend_from_slice(&rec.robot_distance);
    }
    Plan {
        cumulative: steps.iter().map(|s| s.cost).sum(),
        steps,
        series,
        mean_robot_distance: if dist.is_empty() {
            0.0
        } else {
            dist.iter().sum::<f64>() / dist.len() as f64
        },
    }
}

/// Full assembly from `(tile 1, arm 1)` with all arms at home.
///
/// The weighted plan minimises the cumulative cost over the whole sequence of
/// graphs at once, so no plan through the same graphs is cheaper. The
/// baseline minimises hop count over feasible edges and is scored with the
/// same metric.
pub fn plan_full_assembly(cfg: &ScenarioConfig, spec: &CostSpec, table: &EdgeTable) -> Result<AssemblyPlan> {
    let graphs = assembly_graphs(cfg)?;
    let layers = traversed(&graphs, cfg.n_total);
    if layers.is_empty() {
        let empty = Plan {
            steps: Vec::new(),
            cumulative: 0.0,
            series: Vec::new(),
            mean_robot_distance: 0.0,
        };
        return Ok(AssemblyPlan {
            spec: *spec,
            graphs,
            weighted: empty.clone(),
            unweighted: empty,
        });
    }
    let lg = layered(&layers, table, spec, (1, 1));
    let wpath = shortest_path(&lg.weights, lg.start, lg.end, SearchMode::Dijkstra)?;
    let weighted = plan_from(&wpath, &lg, &layers, table, spec);

    // the baseline only needs kinematically feasible edges
    let mut unit = lg.weights.clone();
    for ((i, j), (_, e)) in &lg.edges {
        let feasible = table.get(e).map_or(false, |r| r.feasible());
        unit[(*i, *j)] = if feasible { 1.0 } else { f64::INFINITY };
    }
    let upath = shortest_path(&unit, lg.start, lg.end, SearchMode::BfsUnit)?;
    let unweighted = plan_from(&upath, &lg, &layers, table, spec);
    Ok(AssemblyPlan {
        spec: *spec,
        graphs,
        weighted,
        unweighted,
    })
}

/// Weighted and unit-weight plans inside one graph from `(tile, arm)` to
/// another node, or through the action when `to` is `None`.
pub fn plan_in_graph(
    g: &NodeGraph,
    spec: &CostSpec,
    table: &EdgeTable,
    from: (usize, usize),
    to: Option<(usize, usize)>,
) -> Result<(Plan, Plan)> {
    for (t, a) in core::iter::once(from).chain(to) {
        if t == 0 || t > g.n || !(1..=2).contains(&a) {
            return Err(Error::StateInvalid(alloc::format!("node ({t}, {a}) not in a graph with n = {}", g.n)));
        }
    }
    let layers = [g];
    let lg = layered(&layers, table, spec, from);
    let dst = to.map_or(lg.end, |(t, a)| node_index(t, a));
    let wpath = shortest_path(&lg.weights, lg.start, dst, SearchMode::Dijkstra)?;
    let mut unit = lg.weights.clone();
    for ((i, j), (_, e)) in &lg.edges {
        let feasible = table.get(e).map_or(false, |r| r.feasible());
        unit[(*i, *j)] = if feasible { 1.0 } else { f64::INFINITY };
    }
    let upath = shortest_path(&unit, lg.start, dst, SearchMode::BfsUnit)?;
    Ok((
        plan_from(&wpath, &lg, &layers, table, spec),
        plan_from(&upath, &lg, &layers, table, spec),
    ))
}

/// Builds the edge table for a full assembly and plans it.
pub fn plan_full_assembly_serial(sc: &Scenario, spec: &CostSpec) -> Result<(AssemblyPlan, EdgeTable)> {
    let table = evaluate_edges(sc, &assembly_edges(&sc.cfg)?)?;
    Ok((plan_full_assembly(&sc.cfg, spec, &table)?, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, e: &[(usize, usize, f64)]) -> Mat {
        let mut m = Mat::from_element(n, n, f64::INFINITY);
        for &(i, j, x) in e {
            m[(i, j)] = x;
        }
        m
    }

    #[test]
    fn triangle() {
        let g = w(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]);
        let d = shortest_path(&g, 0, 2, SearchMode::Dijkstra).unwrap();
        assert_eq!(d.nodes, vec![0, 1, 2]);
        assert_eq!(d.weight, 2.0);
        let b = shortest_path(&g, 0, 2, SearchMode::BfsUnit).unwrap();
        assert_eq!(b.nodes, vec![0, 2]);
        assert_eq!(b.hops, 1);
        assert_eq!(b.weight, 3.0);
    }

    #[test]
    fn trivial_and_unreachable() {
        let g = w(3, &[(0, 1, 1.0)]);
        let p = shortest_path(&g, 1, 1, SearchMode::Dijkstra).unwrap();
        assert!(p.nodes == vec![1] && p.weight == 0.0 && p.hops == 0);
        assert_eq!(
            shortest_path(&g, 0, 2, SearchMode::Dijkstra),
            Err(Error::Unreachable { src: 0, dst: 2 })
        );
    }

    #[test]
    fn ties_prefer_fewer_hops_then_lexicographic() {
        let g = w(4, &[(0, 1, 1.0), (1, 3, 1.0), (0, 3, 2.0), (0, 2, 1.0), (2, 3, 1.0)]);
        assert_eq!(shortest_path(&g, 0, 3, SearchMode::Dijkstra).unwrap().nodes, vec![0, 3]);
        let g = w(4, &[(0, 2, 1.0), (2, 3, 1.0), (0, 1, 1.0), (1, 3, 1.0)]);
        assert_eq!(shortest_path(&g, 0, 3, SearchMode::Dijkstra).unwrap().nodes, vec![0, 1, 3]);
    }

    #[test]
    fn graph_shapes() {
        let layout = TileLayout::band(6);
        let stack = Vector3::new(1.5, -0.5, 0.0);
        let (p, a) = build_node_graphs(&layout, 3, &stack, 1.5).unwrap();
        assert_eq!(p.len(), 7);
        assert_eq!(a.adjacency.nrows(), 7);
        for g in [&p, &a] {
            for i in 0..7 {
                assert_eq!(g.adjacency[(i, i)], 0.0);
            }
            for (i, j) in g.edges() {
                if let (Node::Grip { arm: x, .. }, Node::Grip { arm: y, .. }) = (g.node(i), g.node(j)) {
                    assert_ne!(x, y);
                }
            }
        }
        // stack reachable from tiles 1 and 2; tile 4 cell (0,-2) touches tile 3 only
        assert!(p.has_edge(node_index(1, 1), 6) && p.has_edge(node_index(2, 2), 6));
        assert!(!p.has_edge(node_index(3, 1), 6));
        assert!(a.has_edge(node_index(3, 1), 6) && !a.has_edge(node_index(1, 1), 6));
        assert!(build_node_graphs(&layout, 7, &stack, 1.5).is_err());
        let cfg = ScenarioConfig::reference(28);
        assert_eq!(assembly_graphs(&cfg).unwrap().len(), 56);
    }

    #[test]
    fn cap_makes_cost_infinite() {
        let s = CostSpec::with_cap(CostKind::HinfInputSens, 1.5).unwrap();
        assert_eq!(s.total(&[1.0; 14]), 14.0);
        assert_eq!(s.total(&[1.0, 2.0]), f64::INFINITY);
        assert!(CostSpec::with_cap(CostKind::MuRS, 0.0).is_err());
        assert_eq!(CostKind::from_name("h2-theta"), Some(CostKind::H2WrenchToTheta));
    }

    #[test]
    fn edge_states_follow_action() {
        let cfg = ScenarioConfig::reference(4);
        let pick = Edge {
            kind: ActionKind::Pickup,
            n: 2,
            carrying: false,
            from: (1, 1),
            to: None,
        };
        let (pts, _) = edge_grid_points(&cfg, &pick, 7).unwrap();
        assert_eq!(pts.len(), 14);
        assert!(pts[..7].iter().all(|p| !p.state.carrying));
        assert!(pts[7..].iter().all(|p| p.state.carrying));
        assert_eq!(pts[0].q, [JointVector::zero(); 3]);
        assert_eq!(pts[13].q, [JointVector::zero(); 3]);
        assert_eq!(pts[6].q, pts[7].q);
        let asm = Edge {
            kind: ActionKind::Assemble,
            n: 2,
            carrying: true,
            from: (1, 2),
            to: None,
        };
        let (pts, _) = edge_grid_points(&cfg, &asm, 7).unwrap();
        assert!(pts[..7].iter().all(|p| p.state.n == 2 && p.state.carrying));
        assert!(pts[7..].iter().all(|p| p.state.n == 3 && !p.state.carrying));
        let walk = Edge {
            kind: ActionKind::Walk,
            n: 2,
            carrying: false,
            from: (1, 1),
            to: Some((2, 2)),
        };
        let (pts, _) = edge_grid_points(&cfg, &walk, 7).unwrap();
        assert!(pts[..7].iter().all(|p| p.state.j == 1 && p.state.arm == 1));
        assert!(pts[7..].iter().all(|p| p.state.j == 2 && p.state.arm == 2));
    }
}
