//! Plan file: `#` header lines followed by one CSV row per lattice state.
//!
//! ```text
//! # driftplan plan 1
//! # config_hash = 3f2a9c01d4e5b687
//! # heading_convention = heading_deg = 45*h counterclockwise from east (h=0 east, h=2 north)
//! # tie_break = DRIFT < UP < ...
//! # geometry = nx 21 ny 29 layers 4 cell_size_m 1000
//! # goal = 15 7 0 any
//! # outcome_semantics = optimistic
//! # cfg dt_s = 2000.0
//! # cfg ...
//! index,ix,iy,layer,heading_deg,action,cost_to_go,steps_to_go
//! 0,0,0,0,0,FORWARD,52,9
//! ```
//!
//! `action` is an action name, `AT_GOAL`, `UNREACHABLE` or `LAND`. Rows
//! without a finite cost carry `-` in both numeric columns. The `cfg` lines
//! hold the full canonical configuration, so a plan file plus its field
//! file are enough to rebuild the planning graph.

use std::fmt::Write as _;

use driftplan_core::flowfield::{FlowField, GridGeometry};
use driftplan_core::lattice::{HeadingMode, Lattice, StateIndex};
use driftplan_core::planner::{FeedbackPlan, HEADING_CONVENTION, TIE_BREAK};
use driftplan_core::transitions::Action;
use serde::Deserialize;

use crate::config::PlannerConfig;
use crate::error::{Error, Result};

pub const PLAN_FORMAT: &str = "driftplan plan 1";
pub const COLUMNS: &str = "index,ix,iy,layer,heading_deg,action,cost_to_go,steps_to_go";
const LAND: &str = "LAND";
const ABSENT: &str = "-";

/// A plan file parsed against its field.
#[derive(Debug, Clone)]
pub struct LoadedPlan {
    pub plan: FeedbackPlan,
    pub config: PlannerConfig,
    /// Hash recorded in the file header.
    pub stamped_hash: String,
}

pub fn geometry_line(g: &GridGeometry) -> String {
    format!(
        "nx {} ny {} layers {} cell_size_m {}",
        g.nx(),
        g.ny(),
        g.num_layers(),
        g.cell_size()
    )
}

fn goal_line(plan: &FeedbackPlan) -> String {
    let g = plan.goal();
    let heading = match g.heading {
        HeadingMode::AnyHeading => "any".to_string(),
        HeadingMode::Exact(h) => h.degrees().to_string(),
    };
    format!("{} {} {} {heading}", g.cell.ix, g.cell.iy, g.cell.layer)
}

/// Decision recorded for a row: an action name, `AT_GOAL`, `UNREACHABLE` or `LAND`.
pub fn decision_name(plan: &FeedbackPlan, z: StateIndex) -> String {
    if !plan.lattice().is_valid(z) {
        return LAND.to_string();
    }
    plan.decision(z).to_string()
}

/// Renders a plan. `hash` is the stamp for the field and configuration the
/// plan was computed from.
pub fn write_plan(plan: &FeedbackPlan, field: &FlowField, config: &PlannerConfig, hash: &str) -> String {
    let lattice = plan.lattice();
    let mut out = String::with_capacity(64 * lattice.len());
    let _ = writeln!(out, "# {PLAN_FORMAT}");
    let _ = writeln!(out, "# config_hash = {hash}");
    let _ = writeln!(out, "# heading_convention = {HEADING_CONVENTION}");
    let _ = writeln!(out, "# tie_break = {TIE_BREAK}");
    let _ = writeln!(out, "# geometry = {}", geometry_line(field.geometry()));
    let _ = writeln!(out, "# goal = {}", goal_line(plan));
    let _ = writeln!(out, "# outcome_semantics = {}", plan.semantics().name());
    for line in config.canonical().lines() {
        let _ = writeln!(out, "# cfg {line}");
    }
    let _ = writeln!(out, "{COLUMNS}");
    for zi in 0..lattice.len() {
        let z = StateIndex(zi as u32);
        let s = lattice.state_at(z).expect("index within lattice");
        let num = |v: Option<String>| v.unwrap_or_else(|| ABSENT.to_string());
        let _ = writeln!(
            out,
            "{zi},{},{},{},{},{},{},{}",
            s.ix,
            s.iy,
            s.layer,
            s.heading.degrees(),
            decision_name(plan, z),
            num(plan.cost_to_go(z).map(|c| c.to_string())),
            num(plan.steps_to_go(z).map(|c| c.to_string())),
        );
    }
    out
}

#[derive(Debug, Deserialize)]
struct Row {
    index: usize,
    ix: usize,
    iy: usize,
    layer: usize,
    heading_deg: u32,
    action: String,
    cost_to_go: String,
    steps_to_go: String,
}

fn optional<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<Option<T>> {
    if tok == ABSENT {
        return Ok(None);
    }
    tok.parse()
        .map(Some)
        .map_err(|_| Error::format(line, format!("invalid {what} `{tok}`")))
}

/// Parses a plan file written by [`write_plan`] for `field`.
///
/// Checks structure only: row order, coordinates, land rows and column
/// syntax. Whether the stored values are optimal is the job of the verifier.
pub fn read_plan(text: &str, field: &FlowField) -> Result<LoadedPlan> {
    let mut version_seen = false;
    let mut stamped_hash = None;
    let mut geometry = None;
    let mut cfg = String::new();
    let mut body_start = None;
    for (i, line) in text.lines().enumerate() {
        let Some(header) = line.strip_prefix('#') else {
            body_start = Some(i);
            break;
        };
        let header = header.trim();
        if header == PLAN_FORMAT {
            version_seen = true;
        } else if let Some(rest) = header.strip_prefix("cfg ") {
            cfg.push_str(rest);
            cfg.push('\n');
        } else if let Some((key, value)) = header.split_once(" = ") {
            match key {
                "config_hash" => stamped_hash = Some(value.to_string()),
                "geometry" => geometry = Some((i + 1, value.to_string())),
                _ => {}
            }
        }
    }
    if !version_seen {
        return Err(Error::format(1, format!("not a plan file (missing `# {PLAN_FORMAT}`)")));
    }
    let stamped_hash = stamped_hash.ok_or_else(|| Error::format(1, "header is missing config_hash"))?;
    let expected_geometry = geometry_line(field.geometry());
    match geometry {
        Some((_, g)) if g == expected_geometry => {}
        Some((n, g)) => {
            return Err(Error::format(
                n,
                format!("plan grid `{g}` does not match field grid `{expected_geometry}`"),
            ))
        }
        None => return Err(Error::format(1, "header is missing geometry")),
    }
    let config = PlannerConfig::from_toml(&cfg, &[], field.geometry())?;
    let goal = config.require_goal()?;
    let body_start = body_start.ok_or_else(|| Error::format(text.lines().count(), "plan has no table"))?;

    let lattice = Lattice::new(field);
    let n = lattice.len();
    let mut actions = Vec::with_capacity(n);
    let mut costs = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n);
    let body: String = text.lines().skip(body_start).flat_map(|l| [l, "\n"]).collect();
    let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let columns: Vec<&str> = reader.headers()?.iter().collect();
    if columns.join(",") != COLUMNS {
        return Err(Error::format(body_start + 1, format!("expected columns `{COLUMNS}`")));
    }
    for (k, record) in reader.deserialize::<Row>().enumerate() {
        let line = body_start + 2 + k;
        let row = record.map_err(|e| Error::format(line, e.to_string()))?;
        if row.index != k || k >= n {
            return Err(Error::format(line, format!("expected state index {k} of {n}, found {}", row.index)));
        }
        let s = lattice.state_at(StateIndex(k as u32))?;
        if (row.ix, row.iy, row.layer, row.heading_deg) != (s.ix, s.iy, s.layer, s.heading.degrees()) {
            return Err(Error::format(line, format!("coordinates do not match state index {k}")));
        }
        let cost = optional::<u64>(line, &row.cost_to_go, "cost_to_go")?;
        let step = optional::<u32>(line, &row.steps_to_go, "steps_to_go")?;
        if cost.is_some() != step.is_some() {
            return Err(Error::format(line, "cost_to_go and steps_to_go must both be present or both `-`"));
        }
        let free = lattice.is_free(s.cell());
        let action = match row.action.as_str() {
            LAND if !free => None,
            LAND => return Err(Error::format(line, format!("state {k} is not over land"))),
            _ if !free => return Err(Error::format(line, format!("state {k} is over land, expected LAND"))),
            "AT_GOAL" => None,
            "UNREACHABLE" => None,
            name => Some(
                Action::from_name(name).ok_or_else(|| Error::format(line, format!("unknown action `{name}`")))?,
            ),
        };
        let has_cost = !matches!(row.action.as_str(), LAND | "UNREACHABLE");
        if has_cost != cost.is_some() {
            return Err(Error::format(line, format!("{} row must {} a cost", row.action, if has_cost { "carry" } else { "not carry" })));
        }
        actions.push(action);
        costs.push(cost);
        steps.push(step);
    }
    if actions.len() != n {
        return Err(Error::format(
            body_start + 2 + actions.len(),
            format!("plan has {} rows, expected {n}", actions.len()),
        ));
    }
    let plan = FeedbackPlan::from_parts(lattice, goal, config.semantics, actions, costs, steps)?
        .with_config_hash(stamped_hash.clone());
    Ok(LoadedPlan {
        plan,
        config,
        stamped_hash,
    })
}
