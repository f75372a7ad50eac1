//! Quiver and trajectory exports.

use std::fmt::Write as _;

use driftplan_core::flowfield::Cell;
use driftplan_core::lattice::{Heading, State, StateIndex};
use driftplan_core::planner::{FeedbackPlan, PlanDecision, PlanningGraph, HEADING_CONVENTION};
use driftplan_core::simulator::{DisturbanceConfig, Trajectory};
use driftplan_core::transitions::Action;

use crate::error::Result;

pub const QUIVER_COLUMNS: &str = "ix,iy,layer,heading_deg,x_m,y_m,action,marker,dx,dy,cost_to_go";
pub const TRAJECTORY_COLUMNS: &str = "step,ix,iy,layer,heading_deg,action,energy_cum,terminal";

/// Glyph a plot should draw for a decision.
pub fn marker(decision: PlanDecision) -> &'static str {
    match decision {
        PlanDecision::AtGoal => "goal",
        PlanDecision::Unreachable => "unreachable",
        PlanDecision::Act(Action::Drift | Action::Forward) => "arrow",
        PlanDecision::Act(Action::Up) => "layer_up",
        PlanDecision::Act(Action::Down) => "layer_down",
        PlanDecision::Act(Action::RotateLeft) => "curl_ccw",
        PlanDecision::Act(Action::RotateRight) => "curl_cw",
    }
}

/// One row per free cell of `layer` with the vehicle at `heading`.
/// `dx, dy` is the nominal horizontal displacement in cells.
pub fn write_quiver(
    graph: &PlanningGraph,
    plan: &FeedbackPlan,
    cell_size: f64,
    layer: usize,
    heading: Heading,
    hash: &str,
) -> Result<String> {
    let lattice = graph.lattice();
    lattice.encode(&State::new(Cell::new(0, 0, layer), heading))?;
    let mut out = String::new();
    let _ = writeln!(out, "# driftplan quiver 1");
    let _ = writeln!(out, "# config_hash = {hash}");
    let _ = writeln!(out, "# heading_convention = {HEADING_CONVENTION}");
    let _ = writeln!(out, "# slice = layer {layer} heading_deg {}", heading.degrees());
    let _ = writeln!(out, "{QUIVER_COLUMNS}");
    for iy in 0..lattice.ny() {
        for ix in 0..lattice.nx() {
            let cell = Cell::new(ix, iy, layer);
            if !lattice.is_free(cell) {
                continue;
            }
            let state = State::new(cell, heading);
            let z = lattice.encode(&state)?;
            let decision = plan.decision(z);
            let (dx, dy) = match decision {
                PlanDecision::Act(a) => {
                    let edge = graph.edge(z, a).expect("plan actions are graph edges");
                    let next = lattice.decode(edge.outcomes.nominal())?;
                    (next.ix as i64 - ix as i64, next.iy as i64 - iy as i64)
                }
                _ => (0, 0),
            };
            let cost = plan.cost_to_go(z).map_or_else(|| "-".to_string(), |c| c.to_string());
            let _ = writeln!(
                out,
                "{ix},{iy},{layer},{},{},{},{decision},{},{dx},{dy},{cost}",
                heading.degrees(),
                ix as f64 * cell_size,
                iy as f64 * cell_size,
                marker(decision),
            );
        }
    }
    Ok(out)
}

/// One row per visited state. `energy_cum` is the energy spent on arrival;
/// the last row holds the final state, the total energy and the terminal
/// marker.
pub fn write_trajectory(
    graph: &PlanningGraph,
    trajectory: &Trajectory,
    disturbance: &DisturbanceConfig,
    hash: &str,
) -> Result<String> {
    let lattice = graph.lattice();
    let mut out = String::new();
    let _ = writeln!(out, "# driftplan trajectory 1");
    let _ = writeln!(out, "# config_hash = {hash}");
    let _ = writeln!(out, "# heading_convention = {HEADING_CONVENTION}");
    let _ = writeln!(
        out,
        "# disturbance = p {} seed {}",
        disturbance.dispersal_probability(),
        disturbance.seed()
    );
    let _ = writeln!(out, "{TRAJECTORY_COLUMNS}");
    let mut row = |step: usize, z: StateIndex, action: &str, energy: u64, terminal: &str| -> Result<()> {
        let s = lattice.decode(z)?;
        let _ = writeln!(
            out,
            "{step},{},{},{},{},{action},{energy},{terminal}",
            s.ix,
            s.iy,
            s.layer,
            s.heading.degrees()
        );
        Ok(())
    };
    let mut energy = 0;
    for s in &trajectory.steps {
        row(s.step, s.state, s.action.name(), energy, "")?;
        energy = s.energy_cum;
    }
    row(
        trajectory.len(),
        trajectory.final_state(),
        "-",
        trajectory.energy(),
        trajectory.terminal.name(),
    )?;
    Ok(out)
}
