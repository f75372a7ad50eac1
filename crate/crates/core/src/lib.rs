//! Feedback motion planning for an underwater vehicle riding layered ocean
//! currents.
//!
//! The pipeline: a [`flowfield::FlowField`] maps every cell to the cell its
//! current carries it to; [`transitions`] turns that into per-action
//! successor sets over the heading-aware [`lattice`]; [`planner`] builds the
//! weighted graph and solves for the energy cost-to-go and optimal action
//! of every state at once; [`simulator`] executes the resulting plan under
//! seeded disturbance.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod flowfield;
pub mod lattice;
pub mod planner;
pub mod scenario;
pub mod simulator;
pub mod transitions;

pub use error::{Error, Result};
pub use flowfield::{generate_synthetic_field, Cell, ContinuousPosition, FlowField, GridGeometry, SyntheticKind};
pub use lattice::{GoalSpec, Heading, HeadingMode, Lattice, State, StateIndex};
pub use planner::{compute_feedback_plan, per_state_dijkstra_oracle, FeedbackPlan, OutcomeSemantics, PlanDecision, PlanningGraph};
pub use simulator::{batch_reachability, rollout, DisturbanceConfig, Terminal, Trajectory};
pub use transitions::{Action, CostSet, OutcomeSet, TransitionModel, TransitionParams, UncertaintyConfig};
