//! Vehicle kinematics on the lattice: alignment with the local current,
//! displacement rules, the six actions and their energy costs.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};
use core::fmt;

use crate::error::{Error, Result};
use crate::flowfield::{Cell, FlowField};
use crate::lattice::{Heading, Lattice, State, StateIndex};

/// Vehicle actions, declared in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Drift,
    Up,
    Down,
    Forward,
    RotateLeft,
    RotateRight,
}

impl Action {
    /// All actions in tie-break order.
    pub const ALL: [Action; 6] = [
        Action::Drift,
        Action::Up,
        Action::Down,
        Action::Forward,
        Action::RotateLeft,
        Action::RotateRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::Drift => "DRIFT",
            Action::Up => "UP",
            Action::Down => "DOWN",
            Action::Forward => "FORWARD",
            Action::RotateLeft => "ROTATE_LEFT",
            Action::RotateRight => "ROTATE_RIGHT",
        }
    }

    pub fn from_name(name: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, Action::RotateLeft | Action::RotateRight)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Energy charged per action. Up and Down are glides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CostSet {
    drift: u32,
    glide: u32,
    forward: u32,
    rotate: u32,
}

impl CostSet {
    pub fn new(drift: u32, glide: u32, forward: u32, rotate: u32) -> Result<Self> {
        if drift < glide && glide < forward && forward < rotate {
            Ok(CostSet {
                drift,
                glide,
                forward,
                rotate,
            })
        } else {
            Err(Error::CostOrdering)
        }
    }

    pub fn drift(&self) -> u32 {
        self.drift
    }

    pub fn glide(&self) -> u32 {
        self.glide
    }

    pub fn forward(&self) -> u32 {
        self.forward
    }

    pub fn rotate(&self) -> u32 {
        self.rotate
    }

    pub fn cost(&self, action: Action) -> u32 {
        match action {
            Action::Drift => self.drift,
            Action::Up | Action::Down => self.glide,
            Action::Forward => self.forward,
            Action::RotateLeft | Action::RotateRight => self.rotate,
        }
    }

    /// Every cost multiplied by `k > 0`.
    pub fn scaled(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("cost scale must be positive"));
        }
        let mul = |c: u32| {
            c.checked_mul(k)
                .ok_or(Error::InvalidParameter("scaled cost overflows"))
        };
        CostSet::new(mul(self.drift)?, mul(self.glide)?, mul(self.forward)?, mul(self.rotate)?)
    }
}

impl Default for CostSet {
    fn default() -> Self {
        CostSet {
            drift: 0,
            glide: 2,
            forward: 4,
            rotate: 10,
        }
    }
}

pub fn action_cost(action: Action, costs: &CostSet) -> u32 {
    costs.cost(action)
}

/// Lateral dispersal of position-changing outcomes, in cells to each side.
/// Zero disables dispersal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UncertaintyConfig {
    pub lateral_spread: u8,
}

impl UncertaintyConfig {
    pub const NONE: UncertaintyConfig = UncertaintyConfig { lateral_spread: 0 };
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        UncertaintyConfig { lateral_spread: 1 }
    }
}

/// Successors of one state-action pair. `members` is sorted, deduplicated and
/// contains `nominal`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSet {
    nominal: StateIndex,
    members: Vec<StateIndex>,
}

impl OutcomeSet {
    pub fn singleton(z: StateIndex) -> Self {
        OutcomeSet {
            nominal: z,
            members: vec![z],
        }
    }

    pub fn new(nominal: StateIndex, mut members: Vec<StateIndex>) -> Self {
        members.push(nominal);
        members.sort_unstable();
        members.dedup();
        OutcomeSet { nominal, members }
    }

    pub fn nominal(&self) -> StateIndex {
        self.nominal
    }

    pub fn members(&self) -> &[StateIndex] {
        &self.members
    }

    pub fn contains(&self, z: StateIndex) -> bool {
        self.members.binary_search(&z).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Direction the current carries a cell, or no motion at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowDirection {
    /// Radians in `[0, 2pi)`, counterclockwise from east.
    Toward(f64),
    StillWater,
}

/// Reduces an angle to `[0, 2pi)`.
fn wrap_angle(theta: f64) -> f64 {
    let r = libm::fmod(theta, TAU);
    let r = if r < 0.0 { r + TAU } else { r };
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Smallest angle between two directions, in `[0, pi]`.
pub fn angular_distance(theta: f64, theta_w: f64) -> f64 {
    let d = (wrap_angle(theta) - wrap_angle(theta_w)).abs();
    d.min(TAU - d)
}

/// Angular distance in degrees over 180: 0 when aligned, 1 when opposed.
pub fn alignment_score(theta: f64, theta_w: f64) -> f64 {
    angular_distance(theta, theta_w).to_degrees() / 180.0
}

/// Cells moved for a given alignment score: 2 up to 0.2, 1 up to 0.5, else 0.
pub fn displacement_cells(s: f64) -> u8 {
    if s <= 0.2 {
        2
    } else if s <= 0.5 {
        1
    } else {
        0
    }
}

/// Scores between compass directions are exact multiples of 1/8; strip the
/// float noise so the breakpoints compare exactly.
fn snapped_score(theta: f64, theta_w: f64) -> f64 {
    libm::round(alignment_score(theta, theta_w) * 1e9) / 1e9
}

fn direction_between(from: Cell, to: Cell) -> FlowDirection {
    if from.ix == to.ix && from.iy == to.iy {
        return FlowDirection::StillWater;
    }
    let dx = to.ix as f64 - from.ix as f64;
    let dy = to.iy as f64 - from.iy as f64;
    FlowDirection::Toward(wrap_angle(libm::atan2(dy, dx)))
}

/// Direction from a cell's center to the center of its mapped cell.
pub fn flow_direction(field: &FlowField, cell: Cell, dt: f64) -> Result<FlowDirection> {
    let mapped = field.map_cell(cell, dt)?;
    Ok(direction_between(cell, mapped))
}

/// Nearest of the eight compass headings; exact ties round counterclockwise.
fn compass_heading(theta: f64) -> Heading {
    let k = libm::floor(wrap_angle(theta) / FRAC_PI_4 + 0.5) as i64;
    Heading::new(k.rem_euclid(8) as u8).expect("reduced mod 8")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    /// Seconds of advection used to map one cell onto another.
    pub dt: f64,
    pub uncertainty: UncertaintyConfig,
    /// Apply the zero-displacement rule for poorly aligned states to
    /// Forward as well as to current-carried motion.
    pub strict_paper_displacement: bool,
}

impl TransitionParams {
    pub const DEFAULT_REFERENCE_SPEED: f64 = 0.5;

    /// `dt` set to the time needed to cross one cell at `v_ref` m/s.
    pub fn from_reference_speed(cell_size: f64, v_ref: f64) -> Result<Self> {
        if !(v_ref.is_finite() && v_ref > 0.0) {
            return Err(Error::InvalidParameter("reference speed must be positive"));
        }
        Ok(TransitionParams {
            dt: cell_size / v_ref,
            uncertainty: UncertaintyConfig::default(),
            strict_paper_displacement: false,
        })
    }
}

/// Successor generator over a fixed field. Mapped cells are cached once.
#[derive(Debug, Clone)]
pub struct TransitionModel<'a> {
    field: &'a FlowField,
    lattice: Lattice,
    params: TransitionParams,
    mapped: Vec<Cell>,
}

impl<'a> TransitionModel<'a> {
    pub fn new(field: &'a FlowField, params: TransitionParams) -> Result<Self> {
        if !(params.dt.is_finite() && params.dt > 0.0) {
            return Err(Error::InvalidParameter("time step must be positive"));
        }
        let g = field.geometry();
        let mut mapped = Vec::with_capacity(g.cell_count());
        for offset in 0..g.cell_count() {
            let cell = g.cell_at_offset(offset);
            if field.land_mask()[offset] {
                mapped.push(cell);
            } else {
                mapped.push(field.map_cell(cell, params.dt)?);
            }
        }
        Ok(TransitionModel {
            field,
            lattice: Lattice::new(field),
            params,
            mapped,
        })
    }

    pub fn field(&self) -> &'a FlowField {
        self.field
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn params(&self) -> &TransitionParams {
        &self.params
    }

    /// Cached `map_cell` result for a free cell.
    pub fn mapped_cell(&self, cell: Cell) -> Result<Cell> {
        if !self.lattice.is_free(cell) {
            return Err(if self.lattice.in_bounds(cell) {
                Error::LandCell(cell)
            } else {
                Error::OutOfBounds(cell)
            });
        }
        let offset = self.field.geometry().offset(cell)?;
        Ok(self.mapped[offset])
    }

    pub fn flow_direction(&self, cell: Cell) -> Result<FlowDirection> {
        Ok(direction_between(cell, self.mapped_cell(cell)?))
    }

    /// Walks `steps` one-cell moves along `heading`, snapping every move
    /// back onto a free in-bounds cell.
    fn walk(&self, from: Cell, heading: Heading, steps: u8) -> Cell {
        let (dx, dy) = heading.step();
        let mut at = from;
        for _ in 0..steps {
            let tx = (at.ix as i64 + dx) as f64;
            let ty = (at.iy as i64 + dy) as f64;
            at = self
                .field
                .resolve_point(at.layer, tx, ty)
                .expect("layer holds the walking cell, so it has a free cell");
        }
        at
    }

    /// Cells carried by the current from `cell` for a vehicle facing `heading`.
    fn carried(&self, cell: Cell, heading: Heading) -> Result<Cell> {
        Ok(match self.flow_direction(cell)? {
            FlowDirection::StillWater => cell,
            FlowDirection::Toward(theta_w) => {
                let s = snapped_score(heading.radians(), theta_w);
                self.walk(cell, compass_heading(theta_w), displacement_cells(s))
            }
        })
    }

    fn forward_steps(&self, cell: Cell, heading: Heading) -> Result<u8> {
        Ok(match self.flow_direction(cell)? {
            FlowDirection::StillWater => 1,
            FlowDirection::Toward(theta_w) => {
                let d = displacement_cells(snapped_score(heading.radians(), theta_w));
                if self.params.strict_paper_displacement {
                    d
                } else {
                    d.max(1)
                }
            }
        })
    }

    /// Nominal successor cell, or `ActionUnavailable`.
    fn nominal_cell(&self, state: &State, action: Action) -> Result<Cell> {
        let cell = state.cell();
        let layers = self.lattice.layers();
        match action {
            Action::RotateLeft | Action::RotateRight => Ok(cell),
            Action::Drift => self.carried(cell, state.heading),
            Action::Forward => {
                let steps = self.forward_steps(cell, state.heading)?;
                Ok(self.walk(cell, state.heading, steps))
            }
            Action::Up | Action::Down => {
                let dest = match action {
                    Action::Up if cell.layer > 0 => cell.layer - 1,
                    Action::Down if cell.layer + 1 < layers => cell.layer + 1,
                    _ => return Err(Error::ActionUnavailable { action, cell }),
                };
                let arrival = self
                    .field
                    .resolve_point(dest, cell.ix as f64, cell.iy as f64)
                    .ok_or(Error::ActionUnavailable { action, cell })?;
                self.carried(arrival, state.heading)
            }
        }
    }

    /// Nominal and uncertainty-expanded successors of `state` under `action`.
    pub fn successors(&self, state: &State, action: Action) -> Result<OutcomeSet> {
        let origin = state.cell();
        if !self.lattice.is_free(origin) {
            return Err(if self.lattice.in_bounds(origin) {
                Error::LandCell(origin)
            } else {
                Error::OutOfBounds(origin)
            });
        }
        let heading = match action {
            Action::RotateLeft => state.heading.left(),
            Action::RotateRight => state.heading.right(),
            _ => state.heading,
        };
        let target = self.nominal_cell(state, action)?;
        let nominal = self.lattice.encode_unchecked(&State::new(target, heading));

        let dx = target.ix as i64 - origin.ix as i64;
        let dy = target.iy as i64 - origin.iy as i64;
        let spread = self.params.uncertainty.lateral_spread as i64;
        if (dx == 0 && dy == 0) || spread == 0 {
            return Ok(OutcomeSet::singleton(nominal));
        }
        let across = libm::atan2(dy as f64, dx as f64) + FRAC_PI_2;
        let (lx, ly) = compass_heading(across).step();
        let mut members = Vec::with_capacity(2 * spread as usize);
        for k in 1..=spread {
            for sign in [-1, 1] {
                let ix = target.ix as i64 + sign * k * lx;
                let iy = target.iy as i64 + sign * k * ly;
                if ix < 0 || iy < 0 {
                    continue;
                }
                let cell = Cell::new(ix as usize, iy as usize, target.layer);
                if self.lattice.is_free(cell) {
                    members.push(self.lattice.encode_unchecked(&State::new(cell, heading)));
                }
            }
        }
        Ok(OutcomeSet::new(nominal, members))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use crate::flowfield::{generate_synthetic_field, GridGeometry, SyntheticKind};

    fn geometry(nx: usize, ny: usize, layers: usize) -> GridGeometry {
        GridGeometry::new(nx, ny, 100.0, (0..layers).map(|l| l as f64 * 5.0).collect()).unwrap()
    }

    fn uniform(nx: usize, ny: usize, layers: usize, u0: f64, v0: f64) -> FlowField {
        generate_synthetic_field(SyntheticKind::Uniform { u0, v0 }, geometry(nx, ny, layers)).unwrap()
    }

    fn params(spread: u8) -> TransitionParams {
        TransitionParams {
            dt: 200.0,
            uncertainty: UncertaintyConfig {
                lateral_spread: spread,
            },
            strict_paper_displacement: false,
        }
    }

    fn st(ix: usize, iy: usize, layer: usize, h: u8) -> State {
        State::new(Cell::new(ix, iy, layer), Heading::new(h).unwrap())
    }

    fn decode_all(model: &TransitionModel<'_>, set: &OutcomeSet) -> Vec<State> {
        set.members()
            .iter()
            .map(|&z| model.lattice().decode(z).unwrap())
            .collect()
    }

    #[test]
    fn angular_distance_examples() {
        assert_eq!(angular_distance(0.0, PI), PI);
        assert_eq!(angular_distance(FRAC_PI_4, FRAC_PI_4), 0.0);
        // both branches of the minimum, evaluated independently
        let direct = (0.1f64 - 6.2).abs();
        let wrapped = 2.0 * PI - direct;
        let expected = direct.min(wrapped);
        assert!((expected - 0.18319).abs() < 1e-5);
        assert!((angular_distance(0.1, 6.2) - expected).abs() < 1e-12);
    }

    #[test]
    fn alignment_score_examples() {
        assert_eq!(alignment_score(1.0, 1.0), 0.0);
        assert_eq!(alignment_score(0.0, PI), 1.0);
        assert_eq!(alignment_score(0.0, FRAC_PI_2), 0.5);
    }

    #[test]
    fn displacement_table() {
        assert_eq!(displacement_cells(0.0), 2);
        assert_eq!(displacement_cells(0.2), 2);
        assert_eq!(displacement_cells(0.2 + 1e-12), 1);
        assert_eq!(displacement_cells(0.5), 1);
        assert_eq!(displacement_cells(0.5 + 1e-12), 0);
        assert_eq!(displacement_cells(0.7), 0);
        assert_eq!(displacement_cells(1.0), 0);
    }

    #[test]
    fn costs() {
        let c = CostSet::default();
        assert_eq!(action_cost(Action::Drift, &c), 0);
        assert_eq!(action_cost(Action::Down, &c), 2);
        assert_eq!(action_cost(Action::Up, &c), 2);
        assert_eq!(action_cost(Action::Forward, &c), 4);
        assert_eq!(action_cost(Action::RotateLeft, &c), 10);
        assert_eq!(action_cost(Action::RotateRight, &c), 10);
        assert_eq!(CostSet::new(0, 2, 2, 10), Err(Error::CostOrdering));
        assert_eq!(c.scaled(3).unwrap(), CostSet::new(0, 6, 12, 30).unwrap());
    }

    #[test]
    fn action_names_round_trip() {
        for a in Action::ALL {
            assert_eq!(Action::from_name(a.name()), Some(a));
        }
        assert_eq!(Action::from_name("HOVER"), None);
        let mut sorted = Action::ALL;
        sorted.sort();
        assert_eq!(sorted, Action::ALL);
    }

    #[test]
    fn flow_direction_examples() {
        let east = uniform(5, 5, 1, 0.5, 0.0);
        let north = uniform(5, 5, 1, 0.0, 0.5);
        let still = uniform(5, 5, 1, 0.0, 0.0);
        let c = Cell::new(2, 2, 0);
        assert_eq!(flow_direction(&east, c, 200.0).unwrap(), FlowDirection::Toward(0.0));
        assert_eq!(flow_direction(&north, c, 200.0).unwrap(), FlowDirection::Toward(FRAC_PI_2));
        assert_eq!(flow_direction(&still, c, 200.0).unwrap(), FlowDirection::StillWater);
    }

    #[test]
    fn forward_in_still_water_disperses_laterally() {
        let f = uniform(5, 5, 1, 0.0, 0.0);
        let m = TransitionModel::new(&f, params(1)).unwrap();
        let out = m.successors(&st(2, 2, 0, 0), Action::Forward).unwrap();
        assert_eq!(m.lattice().decode(out.nominal()).unwrap(), st(3, 2, 0, 0));
        let mut expected = vec![st(3, 1, 0, 0), st(3, 2, 0, 0), st(3, 3, 0, 0)];
        expected.sort_by_key(|s| m.lattice().encode(s).unwrap());
        assert_eq!(decode_all(&m, &out), expected);
    }

    #[test]
    fn dispersal_drops_land_and_offgrid_cells() {
        let f = uniform(5, 5, 1, 0.0, 0.0).with_land([Cell::new(3, 3, 0)]).unwrap();
        let m = TransitionModel::new(&f, params(1)).unwrap();
        let out = m.successors(&st(2, 2, 0, 0), Action::Forward).unwrap();
        assert_eq!(decode_all(&m, &out), vec![st(3, 1, 0, 0), st(3, 2, 0, 0)]);
        let out = m.successors(&st(2, 0, 0, 0), Action::Forward).unwrap();
        assert_eq!(decode_all(&m, &out), vec![st(3, 0, 0, 0), st(3, 1, 0, 0)]);
    }

    #[test]
    fn rotations_keep_position() {
        let f = uniform(3, 3, 1, 0.5, 0.0);
        let m = TransitionModel::new(&f, params(1)).unwrap();
        let right = m.successors(&st(1, 1, 0, 2), Action::RotateRight).unwrap();
        assert_eq!(decode_all(&m, &right), vec![st(1, 1, 0, 1)]);
        let left = m.successors(&st(1, 1, 0, 7), Action::RotateLeft).unwrap();
        assert_eq!(decode_all(&m, &left), vec![st(1, 1, 0, 0)]);
    }

    #[test]
    fn drift_with_aligned_current_moves_two_cells() {
        let f = uniform(6, 3, 1, 0.5, 0.0);
        let m = TransitionModel::new(&f, params(0)).unwrap();
        let out = m.successors(&st(1, 1, 0, 0), Action::Drift).unwrap();
        assert_eq!(decode_all(&m, &out), vec![st(3, 1, 0, 0)]);
    }

    #[test]
    fn drift_depends_on_alignment() {
        let f = uniform(6, 6, 1, 0.5, 0.0);
        let m = TransitionModel::new(&f, params(0)).unwrap();
        // 45 deg off: s = 0.25 -> one cell
        let out = m.successors(&st(1, 1, 0, 1), Action::Drift).unwrap();
        assert_eq!(decode_all(&m, &out), vec![st(2, 1, 0, 1)]);
        // 90 deg off: s = 0.5 -> one cell
        let out = m.successors(&st(1, 1, 0, 6), Action::Drift).unwrap();
        assert_eq!(decode_all(&m, &out), vec![st(2, 1, 0, 6)]);
        // 135 deg off: s = 0.75 -> stays
        let out = m.successors(&st(1, 1, 0, 3), Action::Drift).unwrap();
        assert_eq!(decode_all(&m, &out), vec![st(1, 1, 0, 3)]);
    }

    #[test]
    fn drift_in_still_water_is_identity() {
        let f = uniform(3, 3, 1, 0.0, 0.0);
        let m = TransitionModel::new(&f, params(1)).unwrap();
        for h in 0..8 {
            let out = m.successors(&st(1, 1, 0, h), Action::Drift).unwrap();
            assert_eq!(decode_all(&m, &out), vec![st(1, 1, 0, h)]);
        }
    }

    #[test]
    fn forward_against_current() {
        let f = uniform(6, 3, 1, 0.5, 0.0);
        let permissive = TransitionModel::new(&f, params(0)).unwrap();
        let out = permissive.successors(&st(3, 1, 0, 4), Action::Forward).unwrap();
        assert_eq!(decode_all(&permissive, &out), vec![st(2, 1, 0, 4)]);
        let strict = TransitionModel::new(
            &f,
            TransitionParams {
                strict_paper_displacement: true,
                ..params(0)
            },
        )
        .unwrap();
        let out = strict.successors(&st(3, 1, 0, 4), Action::Forward).unwrap();
        assert_eq!(decode_all(&strict, &out), vec![st(3, 1, 0, 4)]);
        // with the current, both move two cells
        let out = strict.successors(&st(1, 1, 0, 0), Action::Forward).unwrap();
        assert_eq!(decode_all(&strict, &out), vec![st(3, 1, 0, 0)]);
    }

    #[test]
    fn glide_uses_destination_layer_flow() {
        // surface still, lower layer flowing east
        let g = geometry(6, 3, 2);
        let mut u = vec![0.0; 36];
        for x in u.iter_mut().skip(18) {
            *x = 0.5;
        }
        let f = FlowField::new(g, u, vec![0.0; 36], vec![false; 36]).unwrap();
        let m = TransitionModel::new(&f, params(0)).unwrap();
        let down = m.successors(&st(1, 1, 0, 0), Action::Down).unwrap();
        assert_eq!(decode_all(&m, &down), vec![st(3, 1, 1, 0)]);
        let up = m.successors(&st(1, 1, 1, 0), Action::Up).unwrap();
        assert_eq!(decode_all(&m, &up), vec![st(1, 1, 0, 0)]);
    }

    #[test]
    fn glide_unavailable_at_extreme_layers() {
        let f = uniform(3, 3, 2, 0.0, 0.0);
        let m = TransitionModel::new(&f, params(1)).unwrap();
        assert_eq!(
            m.successors(&st(1, 1, 0, 0), Action::Up),
            Err(Error::ActionUnavailable {
                action: Action::Up,
                cell: Cell::new(1, 1, 0)
            })
        );
        assert!(m.successors(&st(1, 1, 1, 0), Action::Down).is_err());
        assert!(m.successors(&st(1, 1, 1, 0), Action::Up).is_ok());
    }

    #[test]
    fn boundary_drift_clamps() {
        let f = uniform(4, 3, 1, 0.5, 0.0);
        let m = TransitionModel::new(&f, params(1)).unwrap();
        // (3,1) maps onto itself at the east edge: treated as still water
        let out = m.successors(&st(3, 1, 0, 0), Action::Drift).unwrap();
        assert_eq!(decode_all(&m, &out), vec![st(3, 1, 0, 0)]);
        // two-cell drift from (2,1) is cut short by the edge
        let out = m.successors(&st(2, 1, 0, 0), Action::Drift).unwrap();
        assert_eq!(m.lattice().decode(out.nominal()).unwrap(), st(3, 1, 0, 0));
    }

    #[test]
    fn compass_rounding() {
        assert_eq!(compass_heading(0.0), Heading::EAST);
        assert_eq!(compass_heading(FRAC_PI_4 / 2.0), Heading::new(1).unwrap());
        assert_eq!(compass_heading(TAU - 0.01), Heading::EAST);
        assert_eq!(compass_heading(libm::atan2(1.0, 2.0)), Heading::new(1).unwrap());
    }

    proptest::proptest! {
        #[test]
        fn angular_distance_properties(a in 0.0..TAU, b in 0.0..TAU, r in 0.0..TAU) {
            let d = angular_distance(a, b);
            proptest::prop_assert!((0.0..=PI).contains(&d));
            proptest::prop_assert!((d - angular_distance(b, a)).abs() < 1e-12);
            let rotated = angular_distance((a + r) % TAU, (b + r) % TAU);
            proptest::prop_assert!((d - rotated).abs() < 1e-9);
            proptest::prop_assert_eq!(angular_distance(a, a), 0.0);
            let s = alignment_score(a, b);
            proptest::prop_assert!((0.0..=1.0).contains(&s));
        }

        #[test]
        fn alignment_monotone_and_displacement_non_increasing(x in 0.0..=PI, y in 0.0..=PI) {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let s_lo = alignment_score(0.0, lo);
            let s_hi = alignment_score(0.0, hi);
            proptest::prop_assert!(s_lo <= s_hi);
            proptest::prop_assert!(displacement_cells(s_lo) >= displacement_cells(s_hi));
        }

        #[test]
        fn outcome_members_are_free_states(
            u0 in -0.8f64..0.8, v0 in -0.8f64..0.8,
            ix in 0usize..5, iy in 0usize..5, layer in 0usize..2, h in 0u8..8,
            land in proptest::collection::vec((0usize..5, 0usize..5, 0usize..2), 0..6),
        ) {
            let f = uniform(5, 5, 2, u0, v0)
                .with_land(land.into_iter().map(|(x, y, l)| Cell::new(x, y, l)))
                .unwrap();
            proptest::prop_assume!(f.is_free(Cell::new(ix, iy, layer)));
            let m = TransitionModel::new(&f, params(1)).unwrap();
            let s = st(ix, iy, layer, h);
            for a in Action::ALL {
                match m.successors(&s, a) {
                    Ok(out) => {
                        proptest::prop_assert!(out.contains(out.nominal()));
                        for z in out.members() {
                            let t = m.lattice().decode(*z).unwrap();
                            match a {
                                Action::RotateLeft | Action::RotateRight => {
                                    proptest::prop_assert_eq!(t.cell(), s.cell());
                                    proptest::prop_assert_eq!(out.len(), 1);
                                }
                                Action::Up => proptest::prop_assert_eq!(t.layer + 1, s.layer),
                                Action::Down => proptest::prop_assert_eq!(t.layer, s.layer + 1),
                                _ => {
                                    proptest::prop_assert_eq!(t.layer, s.layer);
                                    proptest::prop_assert_eq!(t.heading, s.heading);
                                }
                            }
                        }
                    }
                    Err(Error::ActionUnavailable { .. }) => {
                        proptest::prop_assert!(matches!(
                            (a, layer),
                            (Action::Up, 0) | (Action::Down, 1)
                        ));
                    }
                    Err(e) => proptest::prop_assert!(false, "unexpected {e}"),
                }
            }
        }
    }
}
