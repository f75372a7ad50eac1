//! Planning graph construction and the goal-rooted feedback plan.
//!
//! Every state gets a label `(energy, steps)`: the minimum energy to reach
//! the goal set and, among energy-optimal routes, the fewest transitions.
//! Labels are compared lexicographically. The step count never changes which
//! energy is optimal, but it breaks zero-energy drift cycles so that
//! following the plan always terminates.

use alloc::collections::BinaryHeap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use crate::error::{Error, Result};
use crate::flowfield::FlowField;
use crate::lattice::{GoalSpec, Lattice, State, StateIndex};
use crate::transitions::{Action, CostSet, OutcomeSet, TransitionModel, TransitionParams};

pub const HEADING_CONVENTION: &str = "heading_deg = 45*h counterclockwise from east (h=0 east, h=2 north)";
pub const TIE_BREAK: &str = "DRIFT < UP < DOWN < FORWARD < ROTATE_LEFT < ROTATE_RIGHT, then smaller successor index";

/// How an outcome set is valued when backing up cost-to-go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OutcomeSemantics {
    /// Best member: the graph edge construction read literally.
    #[default]
    Optimistic,
    /// Worst member.
    WorstCase,
}

impl OutcomeSemantics {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeSemantics::Optimistic => "optimistic",
            OutcomeSemantics::WorstCase => "worst_case",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "optimistic" => Some(OutcomeSemantics::Optimistic),
            "worst_case" => Some(OutcomeSemantics::WorstCase),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub action: Action,
    pub weight: u32,
    pub outcomes: OutcomeSet,
}

/// One hyperedge per (free state, available action), stored in CSR form.
#[derive(Debug, Clone)]
pub struct PlanningGraph {
    lattice: Lattice,
    costs: CostSet,
    offsets: Vec<usize>,
    sources: Vec<StateIndex>,
    edges: Vec<Edge>,
}

impl PlanningGraph {
    pub fn build(model: &TransitionModel<'_>, costs: CostSet) -> Self {
        let lattice = model.lattice().clone();
        let n = lattice.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut sources = Vec::new();
        let mut edges = Vec::new();
        offsets.push(0);
        for z in 0..n as u32 {
            let z = StateIndex(z);
            if let Ok(state) = lattice.decode(z) {
                for action in Action::ALL {
                    // Unavailable actions (glides off the layer stack) have no edge.
                    if let Ok(outcomes) = model.successors(&state, action) {
                        sources.push(z);
                        edges.push(Edge {
                            action,
                            weight: costs.cost(action),
                            outcomes,
                        });
                    }
                }
            }
            offsets.push(edges.len());
        }
        PlanningGraph {
            lattice,
            costs,
            offsets,
            sources,
            edges,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn costs(&self) -> &CostSet {
        &self.costs
    }

    /// Number of vertices, N (land states included, with no edges).
    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Outgoing hyperedges of `z` in tie-break order of their actions.
    pub fn edges_from(&self, z: StateIndex) -> &[Edge] {
        let i = z.get();
        if i >= self.len() {
            return &[];
        }
        &self.edges[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn edge(&self, z: StateIndex, action: Action) -> Option<&Edge> {
        self.edges_from(z).iter().find(|e| e.action == action)
    }

    pub fn edges(&self) -> impl Iterator<Item = (StateIndex, &Edge)> {
        self.sources.iter().copied().zip(self.edges.iter())
    }
}

/// Builds the transition model for `field` and the graph over it.
pub fn build_graph(field: &FlowField, costs: CostSet, params: TransitionParams) -> Result<PlanningGraph> {
    let model = TransitionModel::new(field, params)?;
    Ok(PlanningGraph::build(&model, costs))
}

/// What the plan says to do in a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanDecision {
    AtGoal,
    Act(Action),
    Unreachable,
}

impl fmt::Display for PlanDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanDecision::AtGoal => f.write_str("AT_GOAL"),
            PlanDecision::Act(a) => a.fmt(f),
            PlanDecision::Unreachable => f.write_str("UNREACHABLE"),
        }
    }
}

type Label = (u64, u32);

fn extend(label: Label, weight: u32) -> Label {
    (label.0 + weight as u64, label.1 + 1)
}

/// Optimal action and cost-to-go for every state of a planning graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackPlan {
    goal: GoalSpec,
    semantics: OutcomeSemantics,
    lattice: Lattice,
    is_goal: Vec<bool>,
    action_of: Vec<Option<Action>>,
    cost_to_go: Vec<Option<u64>>,
    steps_to_go: Vec<Option<u32>>,
    config_hash: Option<String>,
}

impl FeedbackPlan {
    /// Reassembles a plan from stored arrays, checking their shape against
    /// the lattice and the goal.
    pub fn from_parts(
        lattice: Lattice,
        goal: GoalSpec,
        semantics: OutcomeSemantics,
        action_of: Vec<Option<Action>>,
        cost_to_go: Vec<Option<u64>>,
        steps_to_go: Vec<Option<u32>>,
    ) -> Result<Self> {
        let n = lattice.len();
        for (what, found) in [
            ("action_of", action_of.len()),
            ("cost_to_go", cost_to_go.len()),
            ("steps_to_go", steps_to_go.len()),
        ] {
            if found != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    found,
                });
            }
        }
        let mut is_goal = vec![false; n];
        for z in lattice.goal_states(&goal)? {
            is_goal[z.get()] = true;
        }
        Ok(FeedbackPlan {
            goal,
            semantics,
            lattice,
            is_goal,
            action_of,
            cost_to_go,
            steps_to_go,
            config_hash: None,
        })
    }

    pub fn with_config_hash(mut self, hash: impl Into<String>) -> Self {
        self.config_hash = Some(hash.into());
        self
    }

    pub fn config_hash(&self) -> Option<&str> {
        self.config_hash.as_deref()
    }

    pub fn goal(&self) -> &GoalSpec {
        &self.goal
    }

    pub fn semantics(&self) -> OutcomeSemantics {
        self.semantics
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.action_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.action_of.is_empty()
    }

    pub fn is_goal(&self, z: StateIndex) -> bool {
        self.is_goal.get(z.get()).copied().unwrap_or(false)
    }

    pub fn cost_to_go(&self, z: StateIndex) -> Option<u64> {
        self.cost_to_go.get(z.get()).copied().flatten()
    }

    pub fn steps_to_go(&self, z: StateIndex) -> Option<u32> {
        self.steps_to_go.get(z.get()).copied().flatten()
    }

    pub fn action_of(&self, z: StateIndex) -> Option<Action> {
        self.action_of.get(z.get()).copied().flatten()
    }

    pub fn actions(&self) -> &[Option<Action>] {
        &self.action_of
    }

    pub fn costs_to_go(&self) -> &[Option<u64>] {
        &self.cost_to_go
    }

    pub fn all_steps_to_go(&self) -> &[Option<u32>] {
        &self.steps_to_go
    }

    fn label(&self, z: StateIndex) -> Option<Label> {
        Some((self.cost_to_go(z)?, self.steps_to_go(z)?))
    }

    pub fn decision(&self, z: StateIndex) -> PlanDecision {
        if self.is_goal(z) {
            PlanDecision::AtGoal
        } else {
            match self.action_of(z) {
                Some(a) => PlanDecision::Act(a),
                None => PlanDecision::Unreachable,
            }
        }
    }

    /// Constant-time lookup of the planned action for a free state.
    pub fn plan_action(&self, state: &State) -> Result<PlanDecision> {
        Ok(self.decision(self.lattice.encode(state)?))
    }

    /// Member with the smallest `(cost_to_go, steps_to_go, index)`, skipping
    /// unreachable members.
    pub fn best_member(&self, outcomes: &OutcomeSet) -> Option<StateIndex> {
        outcomes
            .members()
            .iter()
            .filter_map(|&m| self.label(m).map(|l| (l, m)))
            .min()
            .map(|(_, m)| m)
    }

    /// Label an edge offers under this plan's semantics.
    fn edge_label(&self, edge: &Edge) -> Option<Label> {
        edge_label(edge, self.semantics, |m| self.label(m))
    }
}

fn edge_label(edge: &Edge, semantics: OutcomeSemantics, label: impl Fn(StateIndex) -> Option<Label>) -> Option<Label> {
    let members = edge.outcomes.members().iter().map(|&m| label(m));
    let base = match semantics {
        OutcomeSemantics::Optimistic => members.flatten().min()?,
        OutcomeSemantics::WorstCase => members.collect::<Option<Vec<_>>>()?.into_iter().max()?,
    };
    Some(extend(base, edge.weight))
}

/// Cost-to-go for every state in one sweep from the goal set over reversed
/// edges, then the tie-broken optimal action per state.
pub fn compute_feedback_plan(
    graph: &PlanningGraph,
    goal: &GoalSpec,
    semantics: OutcomeSemantics,
) -> Result<FeedbackPlan> {
    let lattice = graph.lattice();
    let n = graph.len();
    let goals = lattice.goal_states(goal)?;

    // reverse adjacency: member -> edge ids containing it
    let mut rev_offsets = vec![0usize; n + 1];
    for (_, edge) in graph.edges() {
        for m in edge.outcomes.members() {
            rev_offsets[m.get() + 1] += 1;
        }
    }
    for i in 0..n {
        rev_offsets[i + 1] += rev_offsets[i];
    }
    let mut fill = rev_offsets.clone();
    let mut rev = vec![0u32; rev_offsets[n]];
    for (e, (_, edge)) in graph.edges().enumerate() {
        for m in edge.outcomes.members() {
            rev[fill[m.get()]] = e as u32;
            fill[m.get()] += 1;
        }
    }
    let mut pending: Vec<usize> = graph.edges.iter().map(|e| e.outcomes.len()).collect();

    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &g in &goals {
        best[g.get()] = Some((0, 0));
        heap.push(Reverse(((0u64, 0u32), g.0)));
    }
    while let Some(Reverse((label, z))) = heap.pop() {
        let zi = z as usize;
        if done[zi] {
            continue;
        }
        done[zi] = true;
        for &e in &rev[rev_offsets[zi]..rev_offsets[zi + 1]] {
            let e = e as usize;
            let ready = match semantics {
                OutcomeSemantics::Optimistic => true,
                OutcomeSemantics::WorstCase => {
                    pending[e] -= 1;
                    pending[e] == 0
                }
            };
            if !ready {
                continue;
            }
            let src = graph.sources[e].get();
            if done[src] {
                continue;
            }
            let cand = extend(label, graph.edges[e].weight);
            if best[src].is_none_or(|b| cand < b) {
                best[src] = Some(cand);
                heap.push(Reverse((cand, src as u32)));
            }
        }
    }

    let mut plan = FeedbackPlan::from_parts(
        lattice.clone(),
        *goal,
        semantics,
        vec![None; n],
        best.iter().map(|b| b.map(|l| l.0)).collect(),
        best.iter().map(|b| b.map(|l| l.1)).collect(),
    )?;
    for (zi, label) in best.iter().enumerate() {
        let z = StateIndex(zi as u32);
        if plan.is_goal(z) {
            continue;
        }
        let Some(target) = *label else { continue };
        plan.action_of[zi] = choose_action(graph, &plan, z, target);
    }
    Ok(plan)
}

/// First action, in tie-break order, whose edge attains `target`. Which
/// member gets followed is settled later by [`FeedbackPlan::best_member`].
fn choose_action(graph: &PlanningGraph, plan: &FeedbackPlan, z: StateIndex, target: Label) -> Option<Action> {
    graph
        .edges_from(z)
        .iter()
        .find(|e| plan.edge_label(e) == Some(target))
        .map(|e| e.action)
}

/// Result of a single-start shortest-path query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleAnswer {
    pub cost: Option<u64>,
    pub steps: Option<u32>,
    pub first_action: Option<Action>,
    pub first_successor: Option<StateIndex>,
}

/// Forward Dijkstra from one start to the nearest goal state over the
/// optimistic expansion of the graph (one plain edge per outcome member).
///
/// Labels are `(energy, steps, first action, first successor)`; the first
/// step fields are inherited unchanged along a path, so the winning label
/// carries the tie-broken first move of an optimal route.
pub fn per_state_dijkstra_oracle(graph: &PlanningGraph, start: StateIndex, goal: &GoalSpec) -> Result<OracleAnswer> {
    let lattice = graph.lattice();
    lattice.decode(start)?;
    let goals = lattice.goal_states(goal)?;
    if goals.contains(&start) {
        return Ok(OracleAnswer {
            cost: Some(0),
            steps: Some(0),
            first_action: None,
            first_successor: None,
        });
    }
    let n = graph.len();
    let mut is_goal = vec![false; n];
    for g in goals {
        is_goal[g.get()] = true;
    }
    type OracleLabel = (u64, u32, Action, u32);
    let mut best: Vec<Option<OracleLabel>> = vec![None; n];
    let mut done = vec![false; n];
    done[start.get()] = true;
    let mut heap = BinaryHeap::new();
    for edge in graph.edges_from(start) {
        for &m in edge.outcomes.members() {
            let cand = (edge.weight as u64, 1, edge.action, m.0);
            if best[m.get()].is_none_or(|b| cand < b) {
                best[m.get()] = Some(cand);
                heap.push(Reverse((cand, m.0)));
            }
        }
    }
    while let Some(Reverse((label, z))) = heap.pop() {
        let zi = z as usize;
        if done[zi] {
            continue;
        }
        done[zi] = true;
        if is_goal[zi] {
            return Ok(OracleAnswer {
                cost: Some(label.0),
                steps: Some(label.1),
                first_action: Some(label.2),
                first_successor: Some(StateIndex(label.3)),
            });
        }
        for edge in graph.edges_from(StateIndex(z)) {
            for &m in edge.outcomes.members() {
                if done[m.get()] {
                    continue;
                }
                let cand = (label.0 + edge.weight as u64, label.1 + 1, label.2, label.3);
                if best[m.get()].is_none_or(|b| cand < b) {
                    best[m.get()] = Some(cand);
                    heap.push(Reverse((cand, m.0)));
                }
            }
        }
    }
    Ok(OracleAnswer {
        cost: None,
        steps: None,
        first_action: None,
        first_successor: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Stored cost differs from the one-step backup.
    CostMismatch { stored: Option<u64>, expected: Option<u64> },
    /// Stored action does not attain the backed-up minimum.
    ActionNotOptimal { stored: Option<Action> },
    /// Step count does not decrease by one along the stored action.
    StepsMismatch { stored: Option<u32>, expected: Option<u32> },
    /// Goal state with nonzero cost or an action.
    BadGoal,
    /// Land state carrying a cost or action.
    LandEntry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub index: StateIndex,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "state {}: {:?}", self.index, self.kind)
    }
}

/// Checks the exact integer Bellman equation at every state.
pub fn check_bellman(graph: &PlanningGraph, plan: &FeedbackPlan) -> Result<Vec<Violation>> {
    if graph.lattice() != plan.lattice() {
        return Err(Error::LatticeMismatch);
    }
    let mut out = Vec::new();
    let mut report = |index: StateIndex, kind| out.push(Violation { index, kind });
    for zi in 0..graph.len() {
        let z = StateIndex(zi as u32);
        let stored_cost = plan.cost_to_go(z);
        let stored_action = plan.action_of(z);
        if !graph.lattice().is_valid(z) {
            if stored_cost.is_some() || stored_action.is_some() {
                report(z, ViolationKind::LandEntry);
            }
            continue;
        }
        if plan.is_goal(z) {
            if stored_cost != Some(0) || stored_action.is_some() {
                report(z, ViolationKind::BadGoal);
            }
            continue;
        }
        let cost_only = |m: StateIndex| plan.cost_to_go(m).map(|c| (c, 0u32));
        let expected = graph
            .edges_from(z)
            .iter()
            .filter_map(|e| edge_label(e, plan.semantics, cost_only))
            .map(|l| l.0)
            .min();
        if stored_cost != expected {
            report(
                z,
                ViolationKind::CostMismatch {
                    stored: stored_cost,
                    expected,
                },
            );
            continue;
        }
        let Some(expected_cost) = expected else {
            if stored_action.is_some() {
                report(z, ViolationKind::ActionNotOptimal { stored: stored_action });
            }
            continue;
        };
        let chosen = stored_action.and_then(|a| graph.edge(z, a));
        let attains = chosen
            .and_then(|e| edge_label(e, plan.semantics, cost_only))
            .map(|l| l.0)
            == Some(expected_cost);
        if !attains {
            report(z, ViolationKind::ActionNotOptimal { stored: stored_action });
            continue;
        }
        let via = chosen.and_then(|e| plan.edge_label(e)).map(|l| l.1);
        if via.is_none() || via != plan.steps_to_go(z) {
            report(
                z,
                ViolationKind::StepsMismatch {
                    stored: plan.steps_to_go(z),
                    expected: via,
                },
            );
        }
    }
    Ok(out)
}
