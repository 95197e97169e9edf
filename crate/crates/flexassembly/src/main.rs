use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flexassembly::analysis::ChannelSpec;
use flexassembly::commands::{
    cmd_analyze, cmd_full_assembly, cmd_optimize, cmd_validate, cost_specs, parse_cap, parse_node, parse_state,
    write_manifest, AnalyzeArgs, CliError, OptimizeArgs, RunManifest,
};
use flexassembly::core::pathopt::GraphKind;
use flexassembly::core::scenario::AssemblyState;

#[derive(Parser, Debug)]
#[command(name = "flexassembly", version, about = "Assembly dynamics and path optimization for a walking robot")]
struct Cli {
    /// Scenario file.
    #[arg(long, global = true, default_value = "crates/flexassembly/data/scenario_desk.toml")]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, global = true, env = "FLEXASSEMBLY_OUT", default_value = "out")]
    out: PathBuf,
    /// Seed recorded with the run; every command is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Pickup,
    Assemble,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frequency response of input/output pairs for delta in {-1, 0, 1}.
    Analyze {
        /// `IN{k}:OUT{k}`, e.g. `T_ext{1}:omega_dot_G{1}`; repeatable.
        #[arg(long, required = true)]
        channel: Vec<ChannelSpec>,
        #[arg(long, default_value_t = 0.01)]
        fmin: f64,
        #[arg(long, default_value_t = 100.0)]
        fmax: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
        /// `n,j,arm,delta`.
        #[arg(long, value_parser = parse_state, default_value = "1,1,1,0")]
        state: AssemblyState,
        /// Analyze the attitude closed loop instead of the open-loop plant.
        #[arg(long)]
        closed: bool,
    },
    /// Best path inside one node graph, weighted against unit weights.
    Optimize {
        #[arg(long)]
        cost: String,
        /// Per-grid-point cap, a value or `<x>dB`.
        #[arg(long, value_parser = parse_cap)]
        hard_cap: Option<f64>,
        #[arg(long, value_enum, default_value = "pickup")]
        graph: Kind,
        /// Structure size of the graph.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// `tile,arm`.
        #[arg(long, value_parser = parse_node, default_value = "1,1")]
        from: (usize, usize),
        /// `tile,arm`, or `action` for the graph's action node.
        #[arg(long, default_value = "action")]
        to: String,
    },
    /// Plans the whole assembly for one cost or `all`.
    FullAssembly {
        #[arg(long, default_value = "all")]
        cost: String,
        #[arg(long, value_parser = parse_cap)]
        hard_cap: Option<f64>,
    },
    /// Checks data files; the scenario is checked unless files are given.
    Validate { files: Vec<PathBuf> },
}

fn manifest(cli: &Cli) -> Option<RunManifest> {
    let (command, cost) = match &cli.command {
        Command::Analyze { .. } => ("analyze", None),
        Command::Optimize { cost, .. } => ("optimize", Some(cost.clone())),
        Command::FullAssembly { cost, .. } => ("full-assembly", Some(cost.clone())),
        Command::Validate { .. } => return None,
    };
    Some(RunManifest {
        scenario: cli.scenario.clone(),
        command: command.into(),
        cost,
        out: cli.out.clone(),
        seed: cli.seed,
    })
}

fn run(cli: Cli) -> Result<Vec<String>, CliError> {
    let m = manifest(&cli);
    let lines = execute(cli)?;
    if let Some(m) = m {
        write_manifest(&m)?;
    }
    Ok(lines)
}

fn execute(cli: Cli) -> Result<Vec<String>, CliError> {
    match cli.command {
        Command::Analyze {
            channel,
            fmin,
            fmax,
            points,
            state,
            closed,
        } => cmd_analyze(
            &cli.scenario,
            &cli.out,
            &AnalyzeArgs {
                channels: channel,
                fmin_hz: fmin,
                fmax_hz: fmax,
                points,
                state,
                closed,
            },
        ),
        Command::Optimize {
            cost,
            hard_cap,
            graph,
            n,
            from,
            to,
        } => {
            let spec = cost_specs(&cost, hard_cap)?;
            let [spec] = spec[..] else {
                return Err(CliError::Usage("optimize takes a single cost".into()));
            };
            let to = if to == "action" {
                None
            } else {
                Some(parse_node(&to).map_err(CliError::Usage)?)
            };
            let kind = match graph {
                Kind::Pickup => GraphKind::Pickup,
                Kind::Assemble => GraphKind::Assemble,
            };
            cmd_optimize(&cli.scenario, &cli.out, &OptimizeArgs { spec, kind, n, from, to })
        }
        Command::FullAssembly { cost, hard_cap } => {
            cmd_full_assembly(&cli.scenario, &cli.out, &cost_specs(&cost, hard_cap)?)
        }
        Command::Validate { files } => {
            let scenario = files.is_empty().then_some(cli.scenario.as_path());
            cmd_validate(scenario, &files)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let CliError::Validation(report) = &e {
                for l in report.lines() {
                    println!("{l}");
                }
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
