//! Text format for layered current fields.
//!
//! ```text
//! # comments and blank lines are ignored
//! format_version 1
//! nx 3
//! ny 2
//! cell_size_m 1000
//! layer_depths_m 0 5
//! origin -118.5 33.6          (optional: lon lat of cell (0,0) center)
//! layer 0
//! u
//! 0.1 0.2 0.3                  (ny rows of nx values, row 0 = southernmost)
//! 0.1 0.2 0.3
//! v
//! ...
//! land
//! 0 0 1                        (1 = land)
//! 0 0 0
//! layer 1
//! ...
//! ```
//!
//! Velocities are m/s, `u` east and `v` north. Every row must hold exactly
//! `nx` values; nothing is padded or coerced.

use std::fmt::Write as _;

use driftplan_core::flowfield::{FlowField, GridGeometry};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next meaningful line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next()
            .ok_or_else(|| Error::format(self.last, format!("unexpected end of document, expected {what}")))
    }

    fn keyword(&mut self, kw: &str) -> Result<usize> {
        let (n, line) = self.expect(kw)?;
        if line != kw {
            return Err(Error::format(n, format!("expected `{kw}`, found `{line}`")));
        }
        Ok(n)
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::format(line, format!("invalid {what} `{tok}`")))
}

fn read_grid<T>(
    lines: &mut Lines<'_>,
    nx: usize,
    ny: usize,
    what: &str,
    parse: impl Fn(usize, &str) -> Result<T>,
) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        let (n, line) = lines.expect(&format!("{what} row {row}"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != nx {
            return Err(Error::format(
                n,
                format!("{what} row {row} has {} values, expected {nx}", toks.len()),
            ));
        }
        for tok in toks {
            out.push(parse(n, tok)?);
        }
    }
    Ok(out)
}

/// Parses a field document.
pub fn parse_field(text: &str) -> Result<FlowField> {
    let mut lines = Lines::new(text);
    let mut version = None;
    let mut nx = None;
    let mut ny = None;
    let mut cell_size = None;
    let mut depths: Option<Vec<f64>> = None;
    let mut origin = None;

    let first_layer_line = loop {
        let (n, line) = lines.expect("header or `layer 0`")?;
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        let single = |what: &str| -> Result<&str> {
            match rest.as_slice() {
                [v] => Ok(v),
                _ => Err(Error::format(n, format!("`{what}` takes exactly one value"))),
            }
        };
        match key {
            "format_version" => version = Some(parse_num::<u32>(n, single(key)?, key)?),
            "nx" => nx = Some(parse_num::<usize>(n, single(key)?, key)?),
            "ny" => ny = Some(parse_num::<usize>(n, single(key)?, key)?),
            "cell_size_m" => cell_size = Some(parse_num::<f64>(n, single(key)?, key)?),
            "layer_depths_m" => {
                depths = Some(
                    rest.iter()
                        .map(|t| parse_num::<f64>(n, t, "layer depth"))
                        .collect::<Result<_>>()?,
                )
            }
            "origin" => match rest.as_slice() {
                [lon, lat] => origin = Some((parse_num::<f64>(n, lon, "longitude")?, parse_num::<f64>(n, lat, "latitude")?)),
                _ => return Err(Error::format(n, "`origin` takes longitude and latitude")),
            },
            "layer" => break (n, line),
            other => return Err(Error::format(n, format!("unknown key `{other}`"))),
        }
    };

    let missing = |what: &str| Error::format(first_layer_line.0, format!("header is missing `{what}`"));
    let version = version.ok_or_else(|| missing("format_version"))?;
    if version != FORMAT_VERSION {
        return Err(Error::format(1, format!("unsupported format_version {version}")));
    }
    let nx = nx.ok_or_else(|| missing("nx"))?;
    let ny = ny.ok_or_else(|| missing("ny"))?;
    let cell_size = cell_size.ok_or_else(|| missing("cell_size_m"))?;
    let depths = depths.ok_or_else(|| missing("layer_depths_m"))?;
    let layers = depths.len();
    let mut geometry = GridGeometry::new(nx, ny, cell_size, depths)?;
    if let Some((lon, lat)) = origin {
        geometry = geometry.with_origin(lon, lat);
    }

    let mut u = Vec::with_capacity(geometry.cell_count());
    let mut v = Vec::with_capacity(geometry.cell_count());
    let mut land = Vec::with_capacity(geometry.cell_count());
    let real = |n: usize, tok: &str| parse_num::<f64>(n, tok, "velocity");
    let flag = |n: usize, tok: &str| match tok {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::format(n, format!("land flag must be 0 or 1, found `{tok}`"))),
    };
    for layer in 0..layers {
        let header = if layer == 0 {
            first_layer_line
        } else {
            lines.expect(&format!("`layer {layer}`"))?
        };
        if header.1.split_whitespace().collect::<Vec<_>>() != ["layer", &layer.to_string()] {
            return Err(Error::format(header.0, format!("expected `layer {layer}`, found `{}`", header.1)));
        }
        lines.keyword("u")?;
        u.extend(read_grid(&mut lines, nx, ny, "u", real)?);
        lines.keyword("v")?;
        v.extend(read_grid(&mut lines, nx, ny, "v", real)?);
        lines.keyword("land")?;
        land.extend(read_grid(&mut lines, nx, ny, "land", flag)?);
    }
    if let Some((n, line)) = lines.next() {
        return Err(Error::format(n, format!("trailing content `{line}` after {layers} layers")));
    }
    Ok(FlowField::new(geometry, u, v, land)?)
}

/// Canonical document for a field. Parsing it back yields an identical field.
pub fn write_field(field: &FlowField) -> String {
    let g = field.geometry();
    let mut out = String::new();
    let depths: Vec<String> = g.layer_depths().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "format_version {FORMAT_VERSION}");
    let _ = writeln!(out, "nx {}", g.nx());
    let _ = writeln!(out, "ny {}", g.ny());
    let _ = writeln!(out, "cell_size_m {}", g.cell_size());
    let _ = writeln!(out, "layer_depths_m {}", depths.join(" "));
    if let Some((lon, lat)) = g.origin() {
        let _ = writeln!(out, "origin {lon} {lat}");
    }
    let per_layer = g.nx() * g.ny();
    for layer in 0..g.num_layers() {
        let _ = writeln!(out, "layer {layer}");
        let range = layer * per_layer..(layer + 1) * per_layer;
        let mut section = |name: &str, cells: Vec<String>| {
            let _ = writeln!(out, "{name}");
            for row in cells.chunks(g.nx()) {
                let _ = writeln!(out, "{}", row.join(" "));
            }
        };
        section("u", field.u()[range.clone()].iter().map(f64::to_string).collect());
        section("v", field.v()[range.clone()].iter().map(f64::to_string).collect());
        section(
            "land",
            field.land_mask()[range].iter().map(|&l| if l { "1" } else { "0" }.to_string()).collect(),
        );
    }
    out
}
