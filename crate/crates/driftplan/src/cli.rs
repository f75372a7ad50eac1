//! Command-line driver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use driftplan_core::flowfield::{generate_synthetic_field, Cell, FlowField, GridGeometry, SyntheticKind};
use driftplan_core::lattice::{Lattice, State, StateIndex};
use driftplan_core::planner::{
    build_graph, check_bellman, compute_feedback_plan, per_state_dijkstra_oracle, OutcomeSemantics, PlanningGraph,
};
use driftplan_core::simulator::{batch_reachability, rollout, DisturbanceConfig, Terminal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{heading_from_degrees, PlannerConfig};
use crate::error::{Error, Result, EXIT_USAGE};
use crate::exports::{write_quiver, write_trajectory};
use crate::field_format::{parse_field, write_field};
use crate::plan_file::{read_plan, write_plan, LoadedPlan};
use crate::stamp::config_hash;

#[derive(Debug, Parser)]
#[command(name = "driftplan", version, about = "Feedback motion planning in layered ocean currents")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic field document.
    GenField(GenFieldArgs),
    /// Compute a feedback plan over every state of a field.
    Plan(PlanArgs),
    /// Execute a plan from one start state.
    Rollout(RolloutArgs),
    /// Check a plan against the Bellman equation and a per-state oracle.
    Verify(VerifyArgs),
    /// Roll out from every reachable state and report the fraction reaching the goal.
    Batch(BatchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FieldKind {
    Uniform,
    DoubleGyre,
    Rotational,
}

#[derive(Debug, clap::Args)]
struct GenFieldArgs {
    #[arg(long, value_enum)]
    kind: FieldKind,
    #[arg(long, default_value_t = 21)]
    nx: usize,
    #[arg(long, default_value_t = 29)]
    ny: usize,
    /// Number of layers, 5 m apart starting at the surface.
    #[arg(long, default_value_t = 4, conflicts_with = "depths")]
    layers: usize,
    /// Explicit layer depths in meters, comma separated.
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000.0)]
    cell_size: f64,
    /// Eastward velocity of a uniform field, m/s.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    u: f64,
    /// Northward velocity of a uniform field, m/s.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    v: f64,
    /// Peak speed of the double gyre, m/s.
    #[arg(long, default_value_t = 0.5)]
    amplitude: f64,
    /// Angular rate of the rotational field, rad/s (positive is counterclockwise).
    #[arg(long, default_value_t = 5e-5, allow_hyphen_values = true)]
    omega: f64,
    /// Longitude and latitude of cell (0, 0).
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    origin: Option<Vec<f64>>,
    /// Land cell `ix,iy,layer`; repeatable.
    #[arg(long = "land", value_parser = parse_cell)]
    land: Vec<Cell>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct PlanArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Configuration override `key=value`; repeatable.
    #[arg(long = "set")]
    set: Vec<String>,
    /// Goal cell `ix,iy,layer`, overriding the configuration.
    #[arg(long, value_parser = parse_cell)]
    goal: Option<Cell>,
    #[arg(long)]
    out: PathBuf,
    /// Also write a quiver export of one layer and heading slice.
    #[arg(long)]
    quiver: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    layer: usize,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    heading_deg: i64,
}

#[derive(Debug, clap::Args)]
struct RolloutArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    field: PathBuf,
    /// Start cell `ix,iy,layer`.
    #[arg(long, value_parser = parse_cell)]
    start: Cell,
    /// Start heading; the configured initial heading when omitted.
    #[arg(long, allow_hyphen_values = true)]
    heading_deg: Option<i64>,
    /// Probability of landing on a non-preferred outcome member.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step budget; four times the state count when omitted.
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct VerifyArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    field: PathBuf,
    /// Number of start states compared against the single-start oracle.
    #[arg(long, default_value_t = 32)]
    oracle_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, clap::Args)]
struct BatchArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    field: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step budget per rollout; four times the state count when omitted.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Exit with the verification code when the reached fraction is lower.
    #[arg(long)]
    min_fraction: Option<f64>,
}

fn parse_cell(s: &str) -> std::result::Result<Cell, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [ix, iy, layer] => {
            let num = |t: &str| t.parse::<usize>().map_err(|_| format!("`{t}` is not a cell index"));
            Ok(Cell::new(num(ix)?, num(iy)?, num(layer)?))
        }
        _ => Err(format!("expected ix,iy,layer, found `{s}`")),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_field(path: &Path) -> Result<FlowField> {
    parse_field(&read(path)?).map_err(|e| match e {
        Error::Format { line, msg } => Error::Format {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

/// A plan file with the field and graph it was computed on, after checking
/// the stamped hash.
struct Session {
    loaded: LoadedPlan,
    graph: PlanningGraph,
}

impl Session {
    fn open(plan_path: &Path, field_path: &Path) -> Result<Self> {
        let field = load_field(field_path)?;
        let loaded = read_plan(&read(plan_path)?, &field)?;
        let found = config_hash(&field, &loaded.config);
        if found != loaded.stamped_hash {
            return Err(Error::HashMismatch {
                expected: loaded.stamped_hash,
                found,
            });
        }
        let graph = build_graph(&field, loaded.config.costs, loaded.config.transition_params())?;
        Ok(Session { loaded, graph })
    }

    fn hash(&self) -> &str {
        &self.loaded.stamped_hash
    }

    fn step_budget(&self, max_steps: Option<usize>) -> usize {
        max_steps.unwrap_or(4 * self.graph.len())
    }
}

fn gen_field(args: GenFieldArgs) -> Result<()> {
    let depths = args
        .depths
        .unwrap_or_else(|| (0..args.layers).map(|k| 5.0 * k as f64).collect());
    let mut geometry = GridGeometry::new(args.nx, args.ny, args.cell_size, depths)?;
    if let Some(o) = args.origin {
        geometry = geometry.with_origin(o[0], o[1]);
    }
    let kind = match args.kind {
        FieldKind::Uniform => SyntheticKind::Uniform { u0: args.u, v0: args.v },
        FieldKind::DoubleGyre => SyntheticKind::DoubleGyre {
            amplitude: args.amplitude,
        },
        FieldKind::Rotational => SyntheticKind::Rotational { omega: args.omega },
    };
    let field = generate_synthetic_field(kind, geometry)?.with_land(args.land)?;
    let text = write_field(&field);
    match args.out {
        Some(path) => write(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn plan(args: PlanArgs) -> Result<()> {
    let field = load_field(&args.field)?;
    let text = match &args.config {
        Some(path) => read(path)?,
        None => String::new(),
    };
    let mut overrides = args.set;
    if let Some(c) = args.goal {
        overrides.push(format!("goal=[{}, {}, {}]", c.ix, c.iy, c.layer));
    }
    let config = PlannerConfig::from_toml(&text, &overrides, field.geometry())?;
    let goal = config.require_goal()?;
    let quiver_heading = heading_from_degrees(args.heading_deg)?;
    let hash = config_hash(&field, &config);

    let started = Instant::now();
    let graph = build_graph(&field, config.costs, config.transition_params())?;
    let plan = compute_feedback_plan(&graph, &goal, config.semantics)?.with_config_hash(hash.clone());
    let elapsed = started.elapsed();

    write(&args.out, &write_plan(&plan, &field, &config, &hash))?;
    if let Some(path) = &args.quiver {
        let quiver = write_quiver(&graph, &plan, field.geometry().cell_size(), args.layer, quiver_heading, &hash)?;
        write(path, &quiver)?;
    }
    let lattice = graph.lattice();
    let reachable = lattice
        .valid_indices()
        .filter(|&z| plan.cost_to_go(z).is_some())
        .count();
    println!("config_hash {hash}");
    println!("states {} free {} reachable {reachable}", lattice.len(), lattice.valid_count());
    println!("edges {}", graph.edge_count());
    println!("semantics {}", plan.semantics().name());
    println!("elapsed_ms {:.1}", elapsed.as_secs_f64() * 1e3);
    Ok(())
}

fn rollout_cmd(args: RolloutArgs) -> Result<()> {
    let session = Session::open(&args.plan, &args.field)?;
    let heading = match args.heading_deg {
        Some(deg) => heading_from_degrees(deg)?,
        None => session.loaded.config.initial_heading,
    };
    let disturbance = DisturbanceConfig::new(args.p, args.seed)?;
    let start = State::new(args.start, heading);
    let trajectory = rollout(
        &session.graph,
        &session.loaded.plan,
        &start,
        &disturbance,
        session.step_budget(args.max_steps),
    )?;
    if let Some(path) = &args.out {
        write(path, &write_trajectory(&session.graph, &trajectory, &disturbance, session.hash())?)?;
    }
    let end = session.graph.lattice().decode(trajectory.final_state())?;
    println!("terminal {}", trajectory.terminal.name());
    println!("steps {}", trajectory.len());
    println!("energy {}", trajectory.energy());
    println!("final {} heading_deg {}", end.cell(), end.heading.degrees());
    if trajectory.terminal != Terminal::ReachedGoal {
        return Err(Error::Verification(format!(
            "rollout ended with {} after {} steps",
            trajectory.terminal.name(),
            trajectory.len()
        )));
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<()> {
    let session = Session::open(&args.plan, &args.field)?;
    let plan = &session.loaded.plan;
    let lattice: &Lattice = session.graph.lattice();
    let violations = check_bellman(&session.graph, plan)?;
    for v in violations.iter().take(20) {
        let s = lattice.state_at(v.index)?;
        eprintln!("violation at index {} {} heading_deg {}: {:?}", v.index.0, s.cell(), s.heading.degrees(), v.kind);
    }
    println!("bellman_violations {}", violations.len());

    let mut disagreements = 0;
    if plan.semantics() == OutcomeSemantics::Optimistic {
        let candidates: Vec<StateIndex> = lattice.valid_indices().filter(|&z| !plan.is_goal(z)).collect();
        let k = args.oracle_samples.min(candidates.len());
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        for i in rand::seq::index::sample(&mut rng, candidates.len(), k) {
            let z = candidates[i];
            let oracle = per_state_dijkstra_oracle(&session.graph, z, plan.goal())?;
            let agrees = oracle.cost == plan.cost_to_go(z)
                && oracle.steps == plan.steps_to_go(z)
                && oracle.first_action == plan.action_of(z);
            if !agrees {
                disagreements += 1;
                eprintln!(
                    "oracle disagrees at index {}: plan {:?}/{:?}, oracle {:?}/{:?}",
                    z.0,
                    plan.cost_to_go(z),
                    plan.action_of(z),
                    oracle.cost,
                    oracle.first_action
                );
            }
        }
        println!("oracle_samples {k} disagreements {disagreements}");
    } else {
        println!("oracle_samples 0 (single-start oracle covers optimistic semantics only)");
    }
    if !violations.is_empty() || disagreements > 0 {
        let first = violations.first().map(|v| v.index.0);
        return Err(Error::Verification(match first {
            Some(index) => format!("plan fails verification, first violation at index {index}"),
            None => format!("plan disagrees with the oracle at {disagreements} sampled states"),
        }));
    }
    println!("verified {} states", lattice.len());
    Ok(())
}

fn batch(args: BatchArgs) -> Result<()> {
    let session = Session::open(&args.plan, &args.field)?;
    let disturbance = DisturbanceConfig::new(args.p, args.seed)?;
    let summary = batch_reachability(
        &session.graph,
        &session.loaded.plan,
        &disturbance,
        session.step_budget(args.max_steps),
    )?;
    println!("attempted {}", summary.attempted);
    println!("reached {}", summary.reached);
    println!("stuck {}", summary.stuck);
    println!("step_limit {}", summary.step_limit);
    println!("fraction_reached {:.3}", summary.fraction_reached);
    println!("mean_energy {:.3}", summary.mean_energy);
    println!("mean_steps {:.3}", summary.mean_steps);
    if let Some(min) = args.min_fraction {
        if summary.fraction_reached < min {
            return Err(Error::Verification(format!(
                "fraction reached {:.3} is below {min}",
                summary.fraction_reached
            )));
        }
    }
    Ok(())
}

/// Runs one command and reports failures.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenField(a) => gen_field(a),
        Command::Plan(a) => plan(a),
        Command::Rollout(a) => rollout_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Batch(a) => batch(a),
    }
}

/// Process entry point: parses arguments and maps outcomes to exit codes.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
