use driftplan_core::flowfield::{Cell, FlowField, GridGeometry};
use driftplan_core::lattice::GoalSpec;
use driftplan_core::planner::{
    build_graph, check_bellman, compute_feedback_plan, per_state_dijkstra_oracle, OutcomeSemantics, PlanDecision,
};
use driftplan_core::simulator::{rollout, DisturbanceConfig, Terminal};
use driftplan_core::transitions::{CostSet, TransitionParams, UncertaintyConfig};
use proptest::prelude::*;

/// Random small field: arbitrary per-cell currents and sparse land.
fn arb_field() -> impl Strategy<Value = (FlowField, Cell)> {
    (2usize..6, 2usize..6, 1usize..3).prop_flat_map(|(nx, ny, layers)| {
        let n = nx * ny * layers;
        (
            proptest::collection::vec(-0.9f64..0.9, n),
            proptest::collection::vec(-0.9f64..0.9, n),
            proptest::collection::vec(proptest::bool::weighted(0.15), n),
            0..nx,
            0..ny,
            0..layers,
        )
            .prop_map(move |(u, v, mut land, gx, gy, gl)| {
                let goal = Cell::new(gx, gy, gl);
                land[(gl * ny + gy) * nx + gx] = false;
                let depths = (0..layers).map(|l| l as f64 * 5.0).collect();
                let g = GridGeometry::new(nx, ny, 100.0, depths).unwrap();
                (FlowField::new(g, u, v, land).unwrap(), goal)
            })
    })
}

fn params(spread: u8, strict: bool) -> TransitionParams {
    TransitionParams {
        dt: 200.0,
        uncertainty: UncertaintyConfig {
            lateral_spread: spread,
        },
        strict_paper_displacement: strict,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sweep_matches_single_start_oracle((field, goal) in arb_field(), spread in 0u8..3, strict: bool) {
        let graph = build_graph(&field, CostSet::default(), params(spread, strict)).unwrap();
        let goal = GoalSpec::any_heading(goal);
        let plan = compute_feedback_plan(&graph, &goal, OutcomeSemantics::Optimistic).unwrap();
        prop_assert!(check_bellman(&graph, &plan).unwrap().is_empty());
        for z in graph.lattice().valid_indices() {
            let o = per_state_dijkstra_oracle(&graph, z, &goal).unwrap();
            prop_assert_eq!(o.cost, plan.cost_to_go(z));
            prop_assert_eq!(o.first_action, plan.action_of(z));
        }
    }

    #[test]
    fn cost_scaling_is_exact((field, goal) in arb_field(), k in 1u32..6) {
        let goal = GoalSpec::any_heading(goal);
        let costs = CostSet::new(1, 3, 5, 11).unwrap();
        let a = build_graph(&field, costs, params(1, false)).unwrap();
        let b = build_graph(&field, costs.scaled(k).unwrap(), params(1, false)).unwrap();
        let pa = compute_feedback_plan(&a, &goal, OutcomeSemantics::Optimistic).unwrap();
        let pb = compute_feedback_plan(&b, &goal, OutcomeSemantics::Optimistic).unwrap();
        for (x, y) in pa.costs_to_go().iter().zip(pb.costs_to_go()) {
            prop_assert_eq!(x.map(|c| c * k as u64), *y);
        }
        prop_assert_eq!(pa.actions(), pb.actions());
    }

    #[test]
    fn greedy_execution_descends_to_goal((field, goal) in arb_field(), worst: bool) {
        let semantics = if worst { OutcomeSemantics::WorstCase } else { OutcomeSemantics::Optimistic };
        let graph = build_graph(&field, CostSet::default(), params(1, false)).unwrap();
        let plan = compute_feedback_plan(&graph, &GoalSpec::any_heading(goal), semantics).unwrap();
        prop_assert!(check_bellman(&graph, &plan).unwrap().is_empty());
        for z in graph.lattice().valid_indices() {
            let Some(cost) = plan.cost_to_go(z) else {
                prop_assert_eq!(plan.decision(z), PlanDecision::Unreachable);
                continue;
            };
            let s = graph.lattice().decode(z).unwrap();
            let t = rollout(&graph, &plan, &s, &DisturbanceConfig::none(), graph.len()).unwrap();
            prop_assert_eq!(t.terminal, Terminal::ReachedGoal);
            if !worst {
                prop_assert_eq!(t.energy(), cost);
            } else {
                prop_assert!(t.energy() <= cost);
            }
            let mut label = (cost, plan.steps_to_go(z).unwrap());
            for step in &t.steps {
                let next = (plan.cost_to_go(step.realized).unwrap(), plan.steps_to_go(step.realized).unwrap());
                prop_assert!(next < label);
                label = next;
            }
        }
    }

    #[test]
    fn disturbed_rollouts_stay_on_outcome_sets((field, goal) in arb_field(), p in 0.0f64..=1.0, seed: u64) {
        let graph = build_graph(&field, CostSet::default(), params(1, false)).unwrap();
        let plan = compute_feedback_plan(&graph, &GoalSpec::any_heading(goal), OutcomeSemantics::Optimistic).unwrap();
        let d = DisturbanceConfig::new(p, seed).unwrap();
        for z in graph.lattice().valid_indices().take(40) {
            let s = graph.lattice().decode(z).unwrap();
            let t = rollout(&graph, &plan, &s, &d, 200).unwrap();
            let mut energy = 0;
            let mut at = z;
            for step in &t.steps {
                prop_assert_eq!(step.state, at);
                prop_assert!(step.outcomes.contains(step.realized));
                energy += graph.costs().cost(step.action) as u64;
                prop_assert_eq!(step.energy_cum, energy);
                at = step.realized;
            }
            prop_assert_eq!(t, rollout(&graph, &plan, &s, &d, 200).unwrap());
        }
    }
}
