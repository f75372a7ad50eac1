//! Closed-loop execution of a feedback plan under seeded lateral disturbance.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{State, StateIndex};
use crate::planner::{FeedbackPlan, PlanDecision, PlanningGraph};
use crate::transitions::{Action, OutcomeSet};

/// Probability of being knocked onto a non-preferred outcome member, plus
/// the seed for the random streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceConfig {
    dispersal_probability: f64,
    seed: u64,
}

impl DisturbanceConfig {
    pub fn new(dispersal_probability: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&dispersal_probability) {
            return Err(Error::InvalidParameter("dispersal probability must be in [0, 1]"));
        }
        Ok(DisturbanceConfig {
            dispersal_probability,
            seed,
        })
    }

    pub fn none() -> Self {
        DisturbanceConfig {
            dispersal_probability: 0.0,
            seed: 0,
        }
    }

    pub fn dispersal_probability(&self) -> f64 {
        self.dispersal_probability
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Random stream owned by the rollout starting at `start`.
    fn stream(&self, start: StateIndex) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(start.0 as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    ReachedGoal,
    StepLimit,
    Stuck,
}

impl Terminal {
    pub fn name(self) -> &'static str {
        match self {
            Terminal::ReachedGoal => "REACHED_GOAL",
            Terminal::StepLimit => "STEP_LIMIT",
            Terminal::Stuck => "STUCK",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryStep {
    pub step: usize,
    pub state: StateIndex,
    pub action: Action,
    pub outcomes: OutcomeSet,
    pub realized: StateIndex,
    /// Energy spent up to and including this step.
    pub energy_cum: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub start: StateIndex,
    pub steps: Vec<TrajectoryStep>,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn energy(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.energy_cum)
    }

    pub fn final_state(&self) -> StateIndex {
        self.steps.last().map_or(self.start, |s| s.realized)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn check_pair(graph: &PlanningGraph, plan: &FeedbackPlan) -> Result<()> {
    if graph.lattice() != plan.lattice() {
        return Err(Error::LatticeMismatch);
    }
    Ok(())
}

fn rollout_from(
    graph: &PlanningGraph,
    plan: &FeedbackPlan,
    start: StateIndex,
    disturbance: &DisturbanceConfig,
    max_steps: usize,
) -> Trajectory {
    let mut rng = disturbance.stream(start);
    let mut steps = Vec::new();
    let mut at = start;
    let mut energy = 0u64;
    let terminal = loop {
        let action = match plan.decision(at) {
            PlanDecision::AtGoal => break Terminal::ReachedGoal,
            PlanDecision::Unreachable => break Terminal::Stuck,
            PlanDecision::Act(a) => a,
        };
        if steps.len() >= max_steps {
            break Terminal::StepLimit;
        }
        let Some(edge) = graph.edge(at, action) else {
            break Terminal::Stuck;
        };
        let outcomes = &edge.outcomes;
        let Some(preferred) = plan.best_member(outcomes) else {
            break Terminal::Stuck;
        };
        let mut realized = preferred;
        if outcomes.len() > 1 && rng.random_bool(disturbance.dispersal_probability) {
            let others: Vec<StateIndex> = outcomes
                .members()
                .iter()
                .copied()
                .filter(|&m| m != preferred)
                .collect();
            realized = others[rng.random_range(0..others.len())];
        }
        energy += edge.weight as u64;
        steps.push(TrajectoryStep {
            step: steps.len(),
            state: at,
            action,
            outcomes: outcomes.clone(),
            realized,
            energy_cum: energy,
        });
        at = realized;
    };
    Trajectory {
        start,
        steps,
        terminal,
    }
}

/// Executes the plan from `start`. With probability `1 - p` each step lands
/// on the outcome member cheapest to go; otherwise on a uniformly chosen
/// other member. Deterministic for a fixed seed.
pub fn rollout(
    graph: &PlanningGraph,
    plan: &FeedbackPlan,
    start: &State,
    disturbance: &DisturbanceConfig,
    max_steps: usize,
) -> Result<Trajectory> {
    check_pair(graph, plan)?;
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1"));
    }
    let z = graph.lattice().encode(start)?;
    Ok(rollout_from(graph, plan, z, disturbance, max_steps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSummary {
    /// Rollouts attempted, one per reachable state.
    pub attempted: usize,
    pub reached: usize,
    pub stuck: usize,
    pub step_limit: usize,
    pub fraction_reached: f64,
    /// Means over all attempted rollouts.
    pub mean_energy: f64,
    pub mean_steps: f64,
}

impl BatchSummary {
    /// No reachable state to start from.
    pub fn is_empty(&self) -> bool {
        self.attempted == 0
    }
}

/// Rolls out from every reachable free state and aggregates the outcomes.
pub fn batch_reachability(
    graph: &PlanningGraph,
    plan: &FeedbackPlan,
    disturbance: &DisturbanceConfig,
    max_steps: usize,
) -> Result<BatchSummary> {
    check_pair(graph, plan)?;
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1"));
    }
    let mut summary = BatchSummary {
        attempted: 0,
        reached: 0,
        stuck: 0,
        step_limit: 0,
        fraction_reached: 0.0,
        mean_energy: 0.0,
        mean_steps: 0.0,
    };
    let mut energy = 0u64;
    let mut steps = 0usize;
    for z in graph.lattice().valid_indices() {
        if plan.cost_to_go(z).is_none() {
            continue;
        }
        let t = rollout_from(graph, plan, z, disturbance, max_steps);
        summary.attempted += 1;
        match t.terminal {
            Terminal::ReachedGoal => summary.reached += 1,
            Terminal::Stuck => summary.stuck += 1,
            Terminal::StepLimit => summary.step_limit += 1,
        }
        energy += t.energy();
        steps += t.len();
    }
    if summary.attempted > 0 {
        let n = summary.attempted as f64;
        summary.fraction_reached = summary.reached as f64 / n;
        summary.mean_energy = energy as f64 / n;
        summary.mean_steps = steps as f64 / n;
    }
    Ok(summary)
}
