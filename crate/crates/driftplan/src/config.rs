//! Planner configuration: a flat TOML table of scalar keys.
//!
//! ```toml
//! v_ref_mps = 0.5            # or dt_s = 2000 (at most one of the two)
//! cost_drift = 0
//! cost_glide = 2
//! cost_forward = 4
//! cost_rotate = 10
//! dispersal_spread = 1
//! strict_paper_displacement = false
//! outcome_semantics = "optimistic"   # or "worst_case"
//! goal = [15, 7, 0]
//! goal_heading = "any"               # or a multiple of 45 degrees
//! initial_heading_deg = 0
//! ```

use std::fmt::Write as _;

use driftplan_core::flowfield::{Cell, GridGeometry};
use driftplan_core::lattice::{GoalSpec, Heading, HeadingMode};
use driftplan_core::planner::OutcomeSemantics;
use driftplan_core::transitions::{CostSet, TransitionParams, UncertaintyConfig};
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dt_s: Option<f64>,
    v_ref_mps: Option<f64>,
    cost_drift: Option<u32>,
    cost_glide: Option<u32>,
    cost_forward: Option<u32>,
    cost_rotate: Option<u32>,
    dispersal_spread: Option<u8>,
    strict_paper_displacement: Option<bool>,
    outcome_semantics: Option<String>,
    goal: Option<[usize; 3]>,
    goal_heading: Option<toml::Value>,
    initial_heading_deg: Option<i32>,
}

/// Fully resolved configuration. `dt_s` is always explicit here.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub dt_s: f64,
    pub costs: CostSet,
    pub dispersal_spread: u8,
    pub strict_paper_displacement: bool,
    pub semantics: OutcomeSemantics,
    pub goal: Option<GoalSpec>,
    pub initial_heading: Heading,
}

impl PlannerConfig {
    /// Defaults for a grid: `v_ref` of 0.5 m/s, costs 0/2/4/10, spread 1,
    /// optimistic outcomes and no goal.
    pub fn defaults(geometry: &GridGeometry) -> Self {
        PlannerConfig::resolve(RawConfig::default(), geometry).expect("defaults are valid")
    }

    /// Parses TOML text and applies `key=value` overrides on top.
    pub fn from_toml(text: &str, overrides: &[String], geometry: &GridGeometry) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{item}` is not key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed: toml::Table = format!("v = {value}")
                .parse()
                .or_else(|_| format!("v = \"{value}\"").parse())
                .map_err(|_| Error::Config(format!("cannot parse value of override `{item}`")))?;
            table.insert(key.to_string(), parsed["v"].clone());
        }
        let raw: RawConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        PlannerConfig::resolve(raw, geometry)
    }

    fn resolve(raw: RawConfig, geometry: &GridGeometry) -> Result<Self> {
        let dt_s = match (raw.dt_s, raw.v_ref_mps) {
            (Some(_), Some(_)) => return Err(Error::Config("set at most one of dt_s and v_ref_mps".into())),
            (Some(dt), None) => {
                if !(dt.is_finite() && dt > 0.0) {
                    return Err(Error::Config(format!("dt_s must be positive, found {dt}")));
                }
                dt
            }
            (None, v_ref) => {
                let v = v_ref.unwrap_or(TransitionParams::DEFAULT_REFERENCE_SPEED);
                TransitionParams::from_reference_speed(geometry.cell_size(), v)?.dt
            }
        };
        let d = CostSet::default();
        let costs = CostSet::new(
            raw.cost_drift.unwrap_or(d.drift()),
            raw.cost_glide.unwrap_or(d.glide()),
            raw.cost_forward.unwrap_or(d.forward()),
            raw.cost_rotate.unwrap_or(d.rotate()),
        )?;
        let semantics = match raw.outcome_semantics.as_deref() {
            None => OutcomeSemantics::default(),
            Some(name) => OutcomeSemantics::from_name(name)
                .ok_or_else(|| Error::Config(format!("outcome_semantics must be optimistic or worst_case, found `{name}`")))?,
        };
        let heading_mode = match raw.goal_heading {
            None => HeadingMode::AnyHeading,
            Some(toml::Value::String(s)) if s == "any" => HeadingMode::AnyHeading,
            Some(toml::Value::Integer(deg)) => HeadingMode::Exact(heading_from_degrees(deg)?),
            Some(other) => return Err(Error::Config(format!("goal_heading must be \"any\" or degrees, found {other}"))),
        };
        let goal = raw.goal.map(|[ix, iy, layer]| GoalSpec {
            cell: Cell::new(ix, iy, layer),
            heading: heading_mode,
        });
        if let Some(g) = goal {
            if !geometry.contains(g.cell) {
                return Err(Error::Config(format!("goal {} is outside the grid", g.cell)));
            }
        }
        Ok(PlannerConfig {
            dt_s,
            costs,
            dispersal_spread: raw.dispersal_spread.unwrap_or(UncertaintyConfig::default().lateral_spread),
            strict_paper_displacement: raw.strict_paper_displacement.unwrap_or(false),
            semantics,
            goal,
            initial_heading: heading_from_degrees(raw.initial_heading_deg.unwrap_or(0) as i64)?,
        })
    }

    pub fn transition_params(&self) -> TransitionParams {
        TransitionParams {
            dt: self.dt_s,
            uncertainty: UncertaintyConfig {
                lateral_spread: self.dispersal_spread,
            },
            strict_paper_displacement: self.strict_paper_displacement,
        }
    }

    pub fn require_goal(&self) -> Result<GoalSpec> {
        self.goal
            .ok_or_else(|| Error::Config("no goal set (use `goal = [ix, iy, layer]` or --goal)".into()))
    }

    /// Stable TOML rendering of every resolved key, in a fixed order.
    /// Parsing it back yields an equal configuration.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dt_s = {:?}", self.dt_s);
        let _ = writeln!(out, "cost_drift = {}", self.costs.drift());
        let _ = writeln!(out, "cost_glide = {}", self.costs.glide());
        let _ = writeln!(out, "cost_forward = {}", self.costs.forward());
        let _ = writeln!(out, "cost_rotate = {}", self.costs.rotate());
        let _ = writeln!(out, "dispersal_spread = {}", self.dispersal_spread);
        let _ = writeln!(out, "strict_paper_displacement = {}", self.strict_paper_displacement);
        let _ = writeln!(out, "outcome_semantics = \"{}\"", self.semantics.name());
        if let Some(g) = self.goal {
            let _ = writeln!(out, "goal = [{}, {}, {}]", g.cell.ix, g.cell.iy, g.cell.layer);
            match g.heading {
                HeadingMode::AnyHeading => {
                    let _ = writeln!(out, "goal_heading = \"any\"");
                }
                HeadingMode::Exact(h) => {
                    let _ = writeln!(out, "goal_heading = {}", h.degrees());
                }
            }
        }
        let _ = writeln!(out, "initial_heading_deg = {}", self.initial_heading.degrees());
        out
    }
}

/// Heading for a multiple of 45 degrees, any sign.
pub fn heading_from_degrees(deg: i64) -> Result<Heading> {
    i32::try_from(deg)
        .ok()
        .and_then(|d| Heading::from_degrees(d).ok())
        .ok_or_else(|| Error::Config(format!("heading {deg} is not a multiple of 45 degrees")))
}
