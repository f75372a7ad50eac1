//! Layered current fields and cell-to-cell flow mapping.
//!
//! Positions are meters on a local planar projection. The center of cell
//! `(ix, iy)` sits at `(ix * cell_size, iy * cell_size)`, so cell `(0, 0)` is
//! the origin and row 0 is the southernmost row. Velocities are constant over
//! a cell; the vertical component is always zero and is not stored.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};

/// Horizontal grid cell on one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub ix: usize,
    pub iy: usize,
    pub layer: usize,
}

impl Cell {
    pub const fn new(ix: usize, iy: usize, layer: usize) -> Self {
        Cell { ix, iy, layer }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, layer {})", self.ix, self.iy, self.layer)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    nx: usize,
    ny: usize,
    cell_size: f64,
    layer_depths: Vec<f64>,
    origin: Option<(f64, f64)>,
}

impl GridGeometry {
    /// Validates the grid: non-empty, positive cell size, depths strictly
    /// increasing from the surface.
    pub fn new(nx: usize, ny: usize, cell_size: f64, layer_depths: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidGeometry("nx and ny must be at least 1"));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidGeometry("cell size must be positive and finite"));
        }
        if layer_depths.is_empty() {
            return Err(Error::InvalidGeometry("at least one layer is required"));
        }
        if layer_depths.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidGeometry("layer depths must be finite"));
        }
        if layer_depths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGeometry("layer depths must be strictly increasing"));
        }
        Ok(GridGeometry {
            nx,
            ny,
            cell_size,
            layer_depths,
            origin: None,
        })
    }

    /// 21 x 29 cells of 1 km with layers at 0, 5, 10 and 15 m.
    pub fn reference_grid() -> Self {
        GridGeometry::new(21, 29, 1000.0, vec![0.0, 5.0, 10.0, 15.0])
            .expect("default geometry is valid")
    }

    /// Attaches the (longitude, latitude) of the center of cell (0, 0).
    pub fn with_origin(mut self, lon_deg: f64, lat_deg: f64) -> Self {
        self.origin = Some((lon_deg, lat_deg));
        self
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn num_layers(&self) -> usize {
        self.layer_depths.len()
    }

    pub fn layer_depths(&self) -> &[f64] {
        &self.layer_depths
    }

    pub fn origin(&self) -> Option<(f64, f64)> {
        self.origin
    }

    /// Number of horizontal cells over all layers.
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny * self.num_layers()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.ix < self.nx && cell.iy < self.ny && cell.layer < self.num_layers()
    }

    /// Flat offset of `cell` in `[layer][iy][ix]` order.
    pub fn offset(&self, cell: Cell) -> Result<usize> {
        if !self.contains(cell) {
            return Err(Error::OutOfBounds(cell));
        }
        Ok((cell.layer * self.ny + cell.iy) * self.nx + cell.ix)
    }

    pub fn cell_at_offset(&self, offset: usize) -> Cell {
        let ix = offset % self.nx;
        let iy = (offset / self.nx) % self.ny;
        let layer = offset / (self.nx * self.ny);
        Cell { ix, iy, layer }
    }

    pub fn cell_center(&self, cell: Cell) -> ContinuousPosition {
        ContinuousPosition {
            x: cell.ix as f64 * self.cell_size,
            y: cell.iy as f64 * self.cell_size,
            layer: cell.layer,
        }
    }
}

/// A point in the horizontal plane of one layer, meters from the center of cell (0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousPosition {
    pub x: f64,
    pub y: f64,
    pub layer: usize,
}

impl ContinuousPosition {
    pub fn new(x: f64, y: f64, layer: usize) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::InvalidParameter("position coordinates must be finite"));
        }
        Ok(ContinuousPosition { x, y, layer })
    }
}

/// Nearest grid index to a coordinate given in cell units. Exact halves go to
/// the smaller index.
fn nearest_index(v: f64) -> i64 {
    libm::ceil(v - 0.5) as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    geometry: GridGeometry,
    u: Vec<f64>,
    v: Vec<f64>,
    land: Vec<bool>,
}

impl FlowField {
    /// Builds a field from flat `[layer][iy][ix]` arrays.
    pub fn new(geometry: GridGeometry, u: Vec<f64>, v: Vec<f64>, land: Vec<bool>) -> Result<Self> {
        let expected = geometry.cell_count();
        for (what, found) in [("u", u.len()), ("v", v.len()), ("land", land.len())] {
            if found != expected {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    found,
                });
            }
        }
        for offset in 0..expected {
            if !land[offset] && !(u[offset].is_finite() && v[offset].is_finite()) {
                return Err(Error::NonFiniteVelocity(geometry.cell_at_offset(offset)));
            }
        }
        Ok(FlowField { geometry, u, v, land })
    }

    /// All-water field at rest.
    pub fn still(geometry: GridGeometry) -> Self {
        let n = geometry.cell_count();
        FlowField {
            geometry,
            u: vec![0.0; n],
            v: vec![0.0; n],
            land: vec![false; n],
        }
    }

    /// Marks additional cells as land.
    pub fn with_land<I: IntoIterator<Item = Cell>>(mut self, cells: I) -> Result<Self> {
        for cell in cells {
            let offset = self.geometry.offset(cell)?;
            self.land[offset] = true;
        }
        Ok(self)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn land_mask(&self) -> &[bool] {
        &self.land
    }

    /// Stored (east, north) velocity of a cell in m/s. Land cells still
    /// report their stored value.
    pub fn flow_at(&self, cell: Cell) -> Result<(f64, f64)> {
        let offset = self.geometry.offset(cell)?;
        Ok((self.u[offset], self.v[offset]))
    }

    pub fn is_land(&self, cell: Cell) -> Result<bool> {
        Ok(self.land[self.geometry.offset(cell)?])
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.geometry
            .offset(cell)
            .map(|o| !self.land[o])
            .unwrap_or(false)
    }

    /// Cell whose center is nearest to `p`.
    pub fn containing_cell(&self, p: ContinuousPosition) -> Result<Cell> {
        let g = &self.geometry;
        let ix = nearest_index(p.x / g.cell_size);
        let iy = nearest_index(p.y / g.cell_size);
        if ix < 0 || iy < 0 || ix >= g.nx as i64 || iy >= g.ny as i64 || p.layer >= g.num_layers() {
            return Err(Error::PositionOutOfBounds {
                x: p.x,
                y: p.y,
                layer: p.layer,
            });
        }
        Ok(Cell::new(ix as usize, iy as usize, p.layer))
    }

    /// One explicit Euler step `p + dt * F(p)` using the containing cell's velocity.
    pub fn euler_step(&self, p: ContinuousPosition, dt: f64) -> Result<ContinuousPosition> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter("time step must be positive"));
        }
        let (u, v) = self.flow_at(self.containing_cell(p)?)?;
        Ok(ContinuousPosition {
            x: p.x + dt * u,
            y: p.y + dt * v,
            layer: p.layer,
        })
    }

    /// Nearest free cell on `layer` to a point given in cell units
    /// (`px = x / cell_size`). Ties go to the smallest row, then column.
    pub fn nearest_free(&self, layer: usize, px: f64, py: f64) -> Option<Cell> {
        let g = &self.geometry;
        if layer >= g.num_layers() {
            return None;
        }
        let mut best: Option<(f64, Cell)> = None;
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let cell = Cell::new(ix, iy, layer);
                if self.land[(layer * g.ny + iy) * g.nx + ix] {
                    continue;
                }
                let dx = ix as f64 - px;
                let dy = iy as f64 - py;
                let d2 = dx * dx + dy * dy;
                if best.is_none_or(|(b, _)| d2 < b) {
                    best = Some((d2, cell));
                }
            }
        }
        best.map(|(_, c)| c)
    }

    /// Snaps a point (cell units) to the grid: nearest in-bounds cell, or the
    /// nearest free cell when that one is land. `None` only if the whole
    /// layer is land.
    pub fn resolve_point(&self, layer: usize, px: f64, py: f64) -> Option<Cell> {
        let g = &self.geometry;
        if layer >= g.num_layers() {
            return None;
        }
        let ix = nearest_index(px).clamp(0, g.nx as i64 - 1) as usize;
        let iy = nearest_index(py).clamp(0, g.ny as i64 - 1) as usize;
        let cell = Cell::new(ix, iy, layer);
        if self.is_free(cell) {
            Some(cell)
        } else {
            self.nearest_free(layer, px, py)
        }
    }

    /// Advects the center of `cell` for `dt` seconds and snaps the endpoint
    /// back to a free cell on the same layer.
    pub fn map_cell(&self, cell: Cell, dt: f64) -> Result<Cell> {
        if self.is_land(cell)? {
            return Err(Error::LandCell(cell));
        }
        let end = self.euler_step(self.geometry.cell_center(cell), dt)?;
        let cs = self.geometry.cell_size;
        Ok(self
            .resolve_point(cell.layer, end.x / cs, end.y / cs)
            .expect("layer has at least one free cell"))
    }

    /// Follows `map_cell` from `start` until a fixed point or `max_steps`
    /// applications. The fixed point is not repeated in the output.
    pub fn trace_flow_line(&self, start: Cell, dt: f64, max_steps: usize) -> Result<Vec<Cell>> {
        if max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be at least 1"));
        }
        let mut line = vec![start];
        let mut current = start;
        for _ in 0..max_steps {
            let next = self.map_cell(current, dt)?;
            if next == current {
                break;
            }
            line.push(next);
            current = next;
        }
        Ok(line)
    }
}

/// Analytic test fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    /// Constant velocity `(u0, v0)` everywhere.
    Uniform { u0: f64, v0: f64 },
    /// Two counter-rotating cells side by side in x, peak speed `amplitude`.
    DoubleGyre { amplitude: f64 },
    /// Solid-body rotation about the domain center at `omega` rad/s.
    Rotational { omega: f64 },
}

/// Deterministic analytic field, replicated on every layer, no land.
///
/// The double gyre uses `u = -A sin(pi x / W) cos(pi y / H)`,
/// `v = A cos(pi x / W) sin(pi y / H)` where the cell-center span in x is
/// `2W` and in y is `H`. Gyre centers sit at `x = W/2` and `x = 3W/2`,
/// `y = H/2`.
pub fn generate_synthetic_field(kind: SyntheticKind, geometry: GridGeometry) -> Result<FlowField> {
    let params_finite = match kind {
        SyntheticKind::Uniform { u0, v0 } => u0.is_finite() && v0.is_finite(),
        SyntheticKind::DoubleGyre { amplitude } => amplitude.is_finite(),
        SyntheticKind::Rotational { omega } => omega.is_finite(),
    };
    if !params_finite {
        return Err(Error::InvalidParameter("synthetic field parameters must be finite"));
    }
    let (nx, ny, cs) = (geometry.nx, geometry.ny, geometry.cell_size);
    let span_x = (nx - 1) as f64 * cs;
    let span_y = (ny - 1) as f64 * cs;
    let fraction = |i: usize, n: usize| if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };

    let mut field = FlowField::still(geometry);
    let layers = field.geometry.num_layers();
    for layer in 0..layers {
        for iy in 0..ny {
            for ix in 0..nx {
                let (u, v) = match kind {
                    SyntheticKind::Uniform { u0, v0 } => (u0, v0),
                    SyntheticKind::DoubleGyre { amplitude } => {
                        let ax = 2.0 * PI * fraction(ix, nx);
                        let ay = PI * fraction(iy, ny);
                        (
                            -amplitude * libm::sin(ax) * libm::cos(ay),
                            amplitude * libm::cos(ax) * libm::sin(ay),
                        )
                    }
                    SyntheticKind::Rotational { omega } => {
                        let x = ix as f64 * cs - span_x / 2.0;
                        let y = iy as f64 * cs - span_y / 2.0;
                        (-omega * y, omega * x)
                    }
                };
                let offset = (layer * ny + iy) * nx + ix;
                field.u[offset] = u;
                field.v[offset] = v;
            }
        }
    }
    Ok(field)
}
