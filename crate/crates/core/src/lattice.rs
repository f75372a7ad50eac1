//! Discretized state space: free cells times eight headings.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;
use core::fmt;

use crate::error::{Error, Result};
use crate::flowfield::{Cell, FlowField};

pub const NUM_HEADINGS: usize = 8;

/// Heading class `h`, i.e. `h * 45` degrees counterclockwise from east.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Heading(u8);

impl Heading {
    pub const EAST: Heading = Heading(0);
    pub const NORTH: Heading = Heading(2);
    pub const WEST: Heading = Heading(4);
    pub const SOUTH: Heading = Heading(6);

    pub fn new(h: u8) -> Result<Self> {
        if (h as usize) < NUM_HEADINGS {
            Ok(Heading(h))
        } else {
            Err(Error::InvalidHeading(h))
        }
    }

    /// Heading from a multiple of 45 degrees (any sign, wraps).
    pub fn from_degrees(deg: i32) -> Result<Self> {
        if deg % 45 != 0 {
            return Err(Error::InvalidParameter("heading must be a multiple of 45 degrees"));
        }
        Ok(Heading((deg / 45).rem_euclid(NUM_HEADINGS as i32) as u8))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn degrees(self) -> u32 {
        self.0 as u32 * 45
    }

    pub fn radians(self) -> f64 {
        self.0 as f64 * FRAC_PI_4
    }

    /// Counterclockwise by 45 degrees.
    pub fn left(self) -> Self {
        Heading((self.0 + 1) % NUM_HEADINGS as u8)
    }

    /// Clockwise by 45 degrees.
    pub fn right(self) -> Self {
        Heading((self.0 + NUM_HEADINGS as u8 - 1) % NUM_HEADINGS as u8)
    }

    /// One-cell grid step along this heading.
    pub fn step(self) -> (i64, i64) {
        const STEPS: [(i64, i64); NUM_HEADINGS] = [
            (1, 0),
            (1, 1),
            (0, 1),
            (-1, 1),
            (-1, 0),
            (-1, -1),
            (0, -1),
            (1, -1),
        ];
        STEPS[self.0 as usize]
    }

    pub fn all() -> impl Iterator<Item = Heading> {
        (0..NUM_HEADINGS as u8).map(Heading)
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}deg", self.degrees())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    pub ix: usize,
    pub iy: usize,
    pub layer: usize,
    pub heading: Heading,
}

impl State {
    pub fn new(cell: Cell, heading: Heading) -> Self {
        State {
            ix: cell.ix,
            iy: cell.iy,
            layer: cell.layer,
            heading,
        }
    }

    pub fn cell(&self) -> Cell {
        Cell::new(self.ix, self.iy, self.layer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateIndex(pub u32);

impl StateIndex {
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadingMode {
    AnyHeading,
    Exact(Heading),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoalSpec {
    pub cell: Cell,
    pub heading: HeadingMode,
}

impl GoalSpec {
    pub fn any_heading(cell: Cell) -> Self {
        GoalSpec {
            cell,
            heading: HeadingMode::AnyHeading,
        }
    }

    pub fn exact(cell: Cell, heading: Heading) -> Self {
        GoalSpec {
            cell,
            heading: HeadingMode::Exact(heading),
        }
    }

    pub fn contains(&self, state: &State) -> bool {
        state.cell() == self.cell
            && match self.heading {
                HeadingMode::AnyHeading => true,
                HeadingMode::Exact(h) => state.heading == h,
            }
    }
}

/// Index space over `nx * ny * L * 8` states. Heading varies fastest, then
/// `ix`, `iy`, `layer`. Indices over land cells exist but are invalid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    nx: usize,
    ny: usize,
    layers: usize,
    free: Vec<bool>,
}

impl Lattice {
    pub fn new(field: &FlowField) -> Self {
        let g = field.geometry();
        Lattice {
            nx: g.nx(),
            ny: g.ny(),
            layers: g.num_layers(),
            free: field.land_mask().iter().map(|&l| !l).collect(),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Total number of indices, N.
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.layers * NUM_HEADINGS
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.ix < self.nx && cell.iy < self.ny && cell.layer < self.layers
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && self.free[self.cell_offset(cell)]
    }

    fn cell_offset(&self, cell: Cell) -> usize {
        (cell.layer * self.ny + cell.iy) * self.nx + cell.ix
    }

    fn check_cell(&self, cell: Cell) -> Result<()> {
        if !self.in_bounds(cell) {
            Err(Error::OutOfBounds(cell))
        } else if !self.free[self.cell_offset(cell)] {
            Err(Error::LandCell(cell))
        } else {
            Ok(())
        }
    }

    pub fn encode(&self, state: &State) -> Result<StateIndex> {
        self.check_cell(state.cell())?;
        Ok(self.encode_unchecked(state))
    }

    pub(crate) fn encode_unchecked(&self, state: &State) -> StateIndex {
        let offset = self.cell_offset(state.cell());
        StateIndex((offset * NUM_HEADINGS + state.heading.0 as usize) as u32)
    }

    pub fn decode(&self, z: StateIndex) -> Result<State> {
        let state = self.state_at(z)?;
        self.check_cell(state.cell())?;
        Ok(state)
    }

    /// Decodes any in-range index, land included.
    pub fn state_at(&self, z: StateIndex) -> Result<State> {
        let i = z.get();
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        let heading = Heading((i % NUM_HEADINGS) as u8);
        let offset = i / NUM_HEADINGS;
        let ix = offset % self.nx;
        let iy = (offset / self.nx) % self.ny;
        let layer = offset / (self.nx * self.ny);
        Ok(State {
            ix,
            iy,
            layer,
            heading,
        })
    }

    /// Whether `z` is in range and sits over a free cell.
    pub fn is_valid(&self, z: StateIndex) -> bool {
        z.get() < self.len() && self.free[z.get() / NUM_HEADINGS]
    }

    pub fn valid_indices(&self) -> impl Iterator<Item = StateIndex> + '_ {
        (0..self.len() as u32).map(StateIndex).filter(|&z| self.is_valid(z))
    }

    pub fn valid_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count() * NUM_HEADINGS
    }

    /// Indices making up the goal set, ascending.
    pub fn goal_states(&self, goal: &GoalSpec) -> Result<Vec<StateIndex>> {
        self.check_cell(goal.cell)?;
        Ok(match goal.heading {
            HeadingMode::AnyHeading => Heading::all()
                .map(|h| self.encode_unchecked(&State::new(goal.cell, h)))
                .collect(),
            HeadingMode::Exact(h) => alloc::vec![self.encode_unchecked(&State::new(goal.cell, h))],
        })
    }
}
