use crate::flowfield::Cell;
use crate::transitions::Action;

/// Errors raised by the planning core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("{what}: expected {expected} values, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite velocity at free cell {0}")]
    NonFiniteVelocity(Cell),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("cell {0} is outside the grid")]
    OutOfBounds(Cell),
    #[error("position ({x}, {y}) m on layer {layer} is outside the grid")]
    PositionOutOfBounds { x: f64, y: f64, layer: usize },
    #[error("cell {0} is land")]
    LandCell(Cell),
    #[error("heading index {0} is not in 0..8")]
    InvalidHeading(u8),
    #[error("state index {index} is out of range (N = {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("action {action} is unavailable at {cell}")]
    ActionUnavailable { action: Action, cell: Cell },
    #[error("cost set must satisfy drift < glide < forward < rotate")]
    CostOrdering,
    #[error("plan and graph do not describe the same lattice")]
    LatticeMismatch,
}

pub type Result<T> = core::result::Result<T, Error>;
