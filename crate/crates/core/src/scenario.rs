//! The reference instance: a double gyre on the 21 x 29 x 4-layer grid.

use crate::flowfield::{generate_synthetic_field, Cell, FlowField, GridGeometry, SyntheticKind};
use crate::lattice::GoalSpec;
use crate::transitions::TransitionParams;

/// Peak gyre speed in m/s.
pub const GYRE_AMPLITUDE: f64 = 0.5;

pub fn double_gyre_field() -> FlowField {
    generate_synthetic_field(
        SyntheticKind::DoubleGyre {
            amplitude: GYRE_AMPLITUDE,
        },
        GridGeometry::reference_grid(),
    )
    .expect("reference field is valid")
}

/// Surface cell in the southern half of the eastern gyre, any heading.
pub fn default_goal() -> GoalSpec {
    GoalSpec::any_heading(Cell::new(15, 7, 0))
}

/// `dt` for one cell at the default reference speed, dispersal of one cell.
pub fn default_params(geometry: &GridGeometry) -> TransitionParams {
    TransitionParams::from_reference_speed(geometry.cell_size(), TransitionParams::DEFAULT_REFERENCE_SPEED)
        .expect("default reference speed is positive")
}
