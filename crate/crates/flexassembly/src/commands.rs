//! The four CLI commands. Each writes its artifacts into the output directory
//! and returns the lines it would print.

use std::fs;
use std::path::{Path, PathBuf};

use flexassembly_core::pathopt::{
    assembly_edges, assembly_graphs, plan_full_assembly, plan_in_graph, CostKind, CostSpec, EdgeTable, GraphKind,
    Node, NodeGraph, Plan,
};
use flexassembly_core::robot::JointVector;
use flexassembly_core::scenario::{AssemblyState, Scenario};
use serde_json::{json, Value};

use crate::analysis::{analyze, ChannelSpec};
use crate::config::{load_scenario, ConfigError, LoadedScenario};
use crate::report::{num, write_csv, Plot, Series};
use crate::validate::{validate_file, validate_scenario, Level, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("validation failed")]
    Validation(Report),
    #[error("{0}")]
    Usage(String),
    #[error("writing {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("model error: {0}")]
    Model(flexassembly_core::Error),
}

impl From<flexassembly_core::Error> for CliError {
    fn from(e: flexassembly_core::Error) -> Self {
        CliError::Model(e)
    }
}

impl CliError {
    /// 2 for configuration, parse and validation failures, 3 for model
    /// errors, 4 when no path exists.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Model(e)) | CliError::Model(e) => match e {
                flexassembly_core::Error::Unreachable { .. } => 4,
                flexassembly_core::Error::Config(_) => 2,
                _ => 3,
            },
            CliError::Config(_) | CliError::Validation(_) | CliError::Usage(_) | CliError::Output { .. } => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn out_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(out_err(dir))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(out_err(path))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).expect("json value");
    write_text(path, &(text + "\n"))
}

fn csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_csv(path, header, rows).map_err(out_err(path))
}

fn slug(s: &str) -> String {
    let mut out: String = s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    while out.contains("__") {
        out = out.replace("__", "_");
    }
    out.trim_matches('_').to_string()
}

/// Scenario file loaded and turned into a model context.
pub fn load(path: &Path) -> Result<(LoadedScenario, Scenario)> {
    let loaded = load_scenario(path)?;
    let cfg = loaded.config()?;
    cfg.validate().map_err(ConfigError::from)?;
    let bank = loaded.structure_bank(&cfg)?;
    let sc = Scenario::with_bank(cfg, bank)?;
    Ok((loaded, sc))
}

/// `n,j,arm,delta`.
pub fn parse_state(s: &str) -> std::result::Result<AssemblyState, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| format!("{s:?} is not n,j,arm,delta"))?;
    match v[..] {
        [n, j, arm, d] if d <= 1 => Ok(AssemblyState {
            n,
            j,
            arm,
            carrying: d == 1,
        }),
        _ => Err(format!("{s:?} is not n,j,arm,delta with delta 0 or 1")),
    }
}

/// `tile,arm`.
pub fn parse_node(s: &str) -> std::result::Result<(usize, usize), String> {
    let (t, a) = s.split_once(',').ok_or_else(|| format!("{s:?} is not tile,arm"))?;
    let t = t.trim().parse().map_err(|_| format!("bad tile in {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad arm in {s:?}"))?;
    Ok((t, a))
}

/// A plain value or `<x>dB` (`10^(x/20)`).
pub fn parse_cap(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let v = match t.strip_suffix("dB").or_else(|| t.strip_suffix("db")) {
        Some(db) => 10f64.powf(db.trim().parse::<f64>().map_err(|_| format!("bad cap {s:?}"))? / 20.0),
        None => t.parse::<f64>().map_err(|_| format!("bad cap {s:?}"))?,
    };
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("cap {s:?} must be positive"))
    }
}

pub fn cost_specs(cost: &str, cap: Option<f64>) -> Result<Vec<CostSpec>> {
    let kinds: Vec<CostKind> = if cost == "all" {
        CostKind::ALL.to_vec()
    } else {
        vec![CostKind::from_name(cost).ok_or_else(|| CliError::Usage(format!("unknown cost {cost:?}")))?]
    };
    kinds
        .into_iter()
        .map(|k| match cap {
            Some(c) => Ok(CostSpec::with_cap(k, c)?),
            None => Ok(CostSpec::new(k)),
        })
        .collect()
}

/// What a run was asked to do, saved next to its artifacts.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RunManifest {
    pub scenario: PathBuf,
    pub command: String,
    pub cost: Option<String>,
    pub out: PathBuf,
    pub seed: u64,
}

pub fn write_manifest(m: &RunManifest) -> Result<()> {
    ensure_dir(&m.out)?;
    let v = serde_json::to_value(m).expect("manifest");
    write_json(&m.out.join("manifest.json"), &v)
}

#[derive(Clone, Debug)]
pub struct AnalyzeArgs {
    pub channels: Vec<ChannelSpec>,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub points: usize,
    pub state: AssemblyState,
    pub closed: bool,
}

pub fn cmd_analyze(scenario: &Path, out: &Path, args: &AnalyzeArgs) -> Result<Vec<String>> {
    let (_, sc) = load(scenario)?;
    ensure_dir(out)?;
    let q = [JointVector::zero(); 3];
    let sys = if args.closed {
        sc.closed_loop(&args.state, &q)?
    } else {
        sc.open_loop(&args.state, &q)?
    };
    let mut lines = Vec::new();
    for ch in &args.channels {
        let a = analyze(&sys, ch, args.fmin_hz, args.fmax_hz, args.points)?;
        let name = format!(
            "analyze_{}_{}",
            if args.closed { "closed" } else { "open" },
            slug(&format!("{}_{}", ch.input, ch.output))
        );
        let header = a.header();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let csv_path = out.join(format!("{name}.csv"));
        csv(&csv_path, &header, &a.rows())?;
        let plot = Plot {
            title: format!("{} -> {}", ch.input, ch.output),
            x_label: "frequency [Hz]".into(),
            y_label: "largest singular value".into(),
            log_x: true,
            log_y: true,
            series: a
                .traces
                .iter()
                .map(|t| Series {
                    name: format!("delta = {}", t.delta),
                    points: a.freq_hz.iter().copied().zip(t.sigma.iter().copied()).collect(),
                })
                .collect(),
        };
        let svg_path = out.join(format!("{name}.svg"));
        write_text(&svg_path, &plot.to_svg())?;
        lines.push(format!("{}:{} -> {} and {}", ch.input, ch.output, csv_path.display(), svg_path.display()));
    }
    Ok(lines)
}

fn node_json(n: Node) -> Value {
    match n {
        Node::Grip { tile, arm } => json!({ "tile": tile, "arm": arm }),
        Node::Action => json!("action"),
    }
}

fn kind_name(k: GraphKind) -> &'static str {
    match k {
        GraphKind::Pickup => "pickup",
        GraphKind::Assemble => "assemble",
    }
}

fn plan_json(p: &Plan, table: &EdgeTable) -> Value {
    let steps: Vec<Value> = p
        .steps
        .iter()
        .map(|s| {
            let rec = &table[&s.edge];
            json!({
                "graph": s.graph,
                "graph_kind": kind_name(s.graph_kind),
                "n": s.edge.n,
                "action": s.edge.kind.name(),
                "carrying": s.edge.carrying,
                "from": { "tile": s.edge.from.0, "arm": s.edge.from.1 },
                "to": s.edge.to.map_or(json!("action"), |(t, a)| json!({ "tile": t, "arm": a })),
                "cost": num(s.cost),
                "action_pose": rec.action_q.map(|q| q.iter().map(|j| j.0.to_vec()).collect::<Vec<_>>()),
            })
        })
        .collect();
    json!({
        "cumulative": num(p.cumulative),
        "hops": p.steps.len(),
        "mean_robot_distance": p.mean_robot_distance,
        "steps": steps,
    })
}

fn metric_rows(label: &str, p: &Plan) -> Vec<Vec<String>> {
    p.series
        .iter()
        .map(|r| {
            vec![
                label.to_string(),
                r.grid_index.to_string(),
                num(r.value),
                r.edge_id.to_string(),
                r.action.name().to_string(),
                r.leg.to_string(),
            ]
        })
        .collect()
}

const METRIC_HEADER: [&str; 6] = ["plan", "grid_index", "value", "edge_id", "action", "leg"];

fn comparison_plot(title: &str, w: &Plan, u: &Plan) -> Plot {
    let series = |name: &str, p: &Plan| Series {
        name: name.into(),
        points: p.series.iter().map(|r| (r.grid_index as f64, r.value)).collect(),
    };
    Plot {
        title: title.into(),
        x_label: "grid point".into(),
        y_label: "metric".into(),
        log_x: false,
        log_y: false,
        series: vec![series("weighted", w), series("unweighted", u)],
    }
}

fn graph_json(g: &NodeGraph, spec: &CostSpec, table: &EdgeTable) -> Value {
    let w = g.weights(|e| table.get(e).map_or(f64::INFINITY, |r| r.cost(spec)));
    let rows = |f: &dyn Fn(usize, usize) -> Value| -> Vec<Vec<Value>> {
        (0..g.len()).map(|i| (0..g.len()).map(|j| f(i, j)).collect()).collect()
    };
    json!({
        "kind": kind_name(g.kind),
        "n": g.n,
        "nodes": (0..g.len()).map(|i| node_json(g.node(i))).collect::<Vec<_>>(),
        "adjacency": rows(&|i, j| json!(g.has_edge(i, j) as u8)),
        "weights": rows(&|i, j| if g.has_edge(i, j) { json!(num(w[(i, j)])) } else { Value::Null }),
    })
}

fn summary(label: &str, w: &Plan, u: &Plan) -> String {
    let gap = if u.cumulative.is_finite() && u.cumulative != 0.0 {
        format!("{:.2}%", 100.0 * (u.cumulative - w.cumulative) / u.cumulative)
    } else {
        "n/a".into()
    };
    format!(
        "{label}: weighted {} ({} steps, mean robot distance {:.4} m), unweighted {} ({} steps, mean robot distance {:.4} m), gap {gap}",
        num(w.cumulative),
        w.steps.len(),
        w.mean_robot_distance,
        num(u.cumulative),
        u.steps.len(),
        u.mean_robot_distance
    )
}

#[derive(Clone, Debug)]
pub struct OptimizeArgs {
    pub spec: CostSpec,
    pub kind: GraphKind,
    pub n: usize,
    pub from: (usize, usize),
    /// `None` goes through the action node.
    pub to: Option<(usize, usize)>,
}

pub fn cmd_optimize(scenario: &Path, out: &Path, args: &OptimizeArgs) -> Result<Vec<String>> {
    let (_, sc) = load(scenario)?;
    let graphs = assembly_graphs(&sc.cfg)?;
    let g = graphs
        .iter()
        .find(|g| g.kind == args.kind && g.n == args.n)
        .ok_or_else(|| CliError::Usage(format!("no {} graph with n = {}", kind_name(args.kind), args.n)))?;
    let edges: Vec<_> = g.edges().into_iter().filter_map(|(i, j)| g.edge(i, j)).collect();
    let table = crate::parallel::evaluate_edges(&sc, &edges)?;
    let (w, u) = plan_in_graph(g, &args.spec, &table, args.from, args.to)?;
    ensure_dir(out)?;
    let name = format!("optimize_{}", args.spec.kind.name());
    let mut rows = metric_rows("weighted", &w);
    rows.extend(metric_rows("unweighted", &u));
    csv(&out.join(format!("{name}_metrics.csv")), &METRIC_HEADER, &rows)?;
    write_json(
        &out.join(format!("{name}_trajectory.json")),
        &json!({
            "scenario": scenario.display().to_string(),
            "cost": args.spec.kind.name(),
            "hard_cap": args.spec.hard_cap,
            "weighted": plan_json(&w, &table),
            "unweighted": plan_json(&u, &table),
        }),
    )?;
    write_json(&out.join(format!("{name}_graph.json")), &graph_json(g, &args.spec, &table))?;
    write_text(
        &out.join(format!("{name}.svg")),
        &comparison_plot(&format!("{} per grid point", args.spec.kind.name()), &w, &u).to_svg(),
    )?;
    Ok(vec![summary(args.spec.kind.name(), &w, &u)])
}

pub fn cmd_full_assembly(scenario: &Path, out: &Path, specs: &[CostSpec]) -> Result<Vec<String>> {
    let (_, sc) = load(scenario)?;
    let edges = assembly_edges(&sc.cfg)?;
    let table = crate::parallel::evaluate_edges(&sc, &edges)?;
    ensure_dir(out)?;
    let feasible = table.values().filter(|r| r.feasible()).count();
    let mut lines = vec![format!(
        "N = {}: {} graphs, {} edges evaluated ({} feasible), {} systems per edge",
        sc.cfg.n_total,
        2 * sc.cfg.n_total,
        table.len(),
        feasible,
        2 * sc.cfg.z
    )];
    for spec in specs {
        let plan = plan_full_assembly(&sc.cfg, spec, &table)?;
        let name = format!("full_{}", spec.kind.name());
        let mut rows = metric_rows("weighted", &plan.weighted);
        rows.extend(metric_rows("unweighted", &plan.unweighted));
        csv(&out.join(format!("{name}_metrics.csv")), &METRIC_HEADER, &rows)?;
        write_json(
            &out.join(format!("{name}_trajectory.json")),
            &json!({
                "scenario": scenario.display().to_string(),
                "cost": spec.kind.name(),
                "hard_cap": spec.hard_cap,
                "weighted": plan_json(&plan.weighted, &table),
                "unweighted": plan_json(&plan.unweighted, &table),
            }),
        )?;
        write_json(
            &out.join(format!("{name}_graphs.json")),
            &Value::Array(plan.graphs.iter().map(|g| graph_json(g, spec, &table)).collect()),
        )?;
        write_text(
            &out.join(format!("{name}.svg")),
            &comparison_plot(
                &format!("{} over the full assembly", spec.kind.name()),
                &plan.weighted,
                &plan.unweighted,
            )
            .to_svg(),
        )?;
        lines.push(summary(spec.kind.name(), &plan.weighted, &plan.unweighted));
    }
    Ok(lines)
}

/// Validates the scenario (when given) and every extra file.
pub fn cmd_validate(scenario: Option<&Path>, files: &[PathBuf]) -> Result<Vec<String>> {
    let mut report = Report::default();
    if let Some(s) = scenario {
        report.checks.extend(validate_scenario(&load_scenario(s)?).checks);
    }
    for f in files {
        report.checks.extend(validate_file(f)?.checks);
    }
    if report.checks.is_empty() {
        return Err(CliError::Usage("nothing to validate".into()));
    }
    if report.worst() == Level::Fail {
        return Err(CliError::Validation(report));
    }
    Ok(report.lines())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_parsers() {
        assert_eq!(parse_node("3,2").unwrap(), (3, 2));
        assert!(parse_node("3").is_err());
        let s = parse_state("2,1,2,1").unwrap();
        assert_eq!((s.n, s.j, s.arm, s.carrying), (2, 1, 2, true));
        assert!(parse_state("2,1,2,2").is_err());
        assert_eq!(parse_cap("20dB").unwrap(), 10.0);
        assert_eq!(parse_cap("3.5").unwrap(), 3.5);
        assert!(parse_cap("-1").is_err());
        assert_eq!(slug("T_ext{1}_omega_dot_G{1}"), "T_ext_1_omega_dot_G_1");
    }

    #[test]
    fn exit_codes() {
        use flexassembly_core::Error;
        assert_eq!(CliError::Model(Error::Unreachable { src: 0, dst: 1 }).exit_code(), 4);
        assert_eq!(CliError::Model(Error::SingularInertia("x".into())).exit_code(), 3);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Config(ConfigError::Invalid("x".into())).exit_code(), 2);
    }
}
