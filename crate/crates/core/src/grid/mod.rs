//! Occupancy grids and the fields derived from them.
//!
//! Cell `(ix, iy)` covers `[ox + ix·r, ox + (ix+1)·r) × [oy + iy·r, oy + (iy+1)·r)`
//! and its center sits at `origin + ((ix + ½)·r, (iy + ½)·r)`. `iy` grows with
//! world y; the ASCII map format stores the maximum-y row first.

mod edt;
mod raytrace;
mod voronoi;

use std::fmt::Write as _;
use std::path::Path;

use crate::error::GridError;

pub use edt::{distance_transform, DistanceField, UnknownAs};
pub use raytrace::raytrace_reveal;
pub use voronoi::{voronoi_field, voronoi_value, VoronoiField, DEFAULT_ALPHA, DEFAULT_D_MAX};

/// Default map resolution in meters per cell.
pub const DEFAULT_GRID_RESOLUTION: f64 = 0.15625;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Unknown,
    Free,
    Occupied,
}

impl Cell {
    fn to_char(self) -> char {
        match self {
            Cell::Unknown => '?',
            Cell::Free => '.',
            Cell::Occupied => '#',
        }
    }

    fn from_char(c: char) -> Option<Cell> {
        match c {
            '?' => Some(Cell::Unknown),
            '.' => Some(Cell::Free),
            '#' => Some(Cell::Occupied),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    cells: Vec<Cell>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, fill: Cell) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyGrid { width, height });
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(GridError::BadResolution(resolution));
        }
        Ok(OccupancyGrid {
            width,
            height,
            resolution,
            origin: (0.0, 0.0),
            cells: vec![fill; width * height],
        })
    }

    pub fn with_origin(mut self, x: f64, y: f64) -> Self {
        self.origin = (x, y);
        self
    }

    /// A belief grid of the same shape with every cell unknown.
    pub fn unknown_like(&self) -> Self {
        OccupancyGrid {
            cells: vec![Cell::Unknown; self.cells.len()],
            ..self.clone()
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn same_shape(&self, other: &OccupancyGrid) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.resolution == other.resolution
            && self.origin == other.origin
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.width + ix
    }

    pub fn get(&self, ix: usize, iy: usize) -> Cell {
        self.cells[self.index(ix, iy)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, cell: Cell) {
        let i = self.index(ix, iy);
        self.cells[i] = cell;
    }

    pub fn in_bounds(&self, ix: i64, iy: i64) -> bool {
        ix >= 0 && iy >= 0 && (ix as usize) < self.width && (iy as usize) < self.height
    }

    /// Cell containing a world position, or `None` outside the grid.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fx = ((x - self.origin.0) / self.resolution).floor();
        let fy = ((y - self.origin.1) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin.0 + (ix as f64 + 0.5) * self.resolution,
            self.origin.1 + (iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn world_width(&self) -> f64 {
        self.width as f64 * self.resolution
    }

    pub fn world_height(&self) -> f64 {
        self.height as f64 * self.resolution
    }

    pub fn count(&self, cell: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == cell).count()
    }

    /// Marks every cell whose center lies in the axis-aligned box as `cell`.
    pub fn fill_rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, cell: Cell) {
        self.fill_where(cell, |x, y| x >= x0 && x <= x1 && y >= y0 && y <= y1);
    }

    /// Marks every cell whose center lies within `radius` of `(cx, cy)`.
    pub fn fill_disk(&mut self, cx: f64, cy: f64, radius: f64, cell: Cell) {
        self.fill_where(cell, |x, y| (x - cx).hypot(y - cy) <= radius);
    }

    pub fn fill_where(&mut self, cell: Cell, pred: impl Fn(f64, f64) -> bool) {
        for iy in 0..self.height {
            for ix in 0..self.width {
                let (x, y) = self.cell_center(ix, iy);
                if pred(x, y) {
                    self.set(ix, iy, cell);
                }
            }
        }
    }

    /// Serializes to the ASCII map format.
    pub fn to_map_string(&self) -> String {
        let mut s = String::with_capacity((self.width + 1) * self.height + 32);
        let _ = writeln!(s, "{} {} {}", self.width, self.height, self.resolution);
        for iy in (0..self.height).rev() {
            s.extend((0..self.width).map(|ix| self.get(ix, iy).to_char()));
            s.push('\n');
        }
        s
    }

    /// Parses the ASCII map format: `W H RESOLUTION`, then `H` rows of `W`
    /// characters from `#`/`.`/`?`, top (maximum-y) row first.
    pub fn parse_map(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| GridError::Header("missing header line".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(GridError::Header(format!(
                "expected `W H RESOLUTION`, got `{header}`"
            )));
        }
        let width: usize = fields[0]
            .parse()
            .map_err(|_| GridError::Header(format!("bad width `{}`", fields[0])))?;
        let height: usize = fields[1]
            .parse()
            .map_err(|_| GridError::Header(format!("bad height `{}`", fields[1])))?;
        let resolution: f64 = fields[2]
            .parse()
            .map_err(|_| GridError::Header(format!("bad resolution `{}`", fields[2])))?;
        let mut grid = OccupancyGrid::new(width, height, resolution, Cell::Unknown)?;
        for row in 0..height {
            let line = lines.next().ok_or_else(|| GridError::Row {
                row,
                reason: "missing row".into(),
            })?;
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.chars().count() != width {
                return Err(GridError::Row {
                    row,
                    reason: format!("expected {width} cells, got {}", line.chars().count()),
                });
            }
            let iy = height - 1 - row;
            for (ix, c) in line.chars().enumerate() {
                let cell = Cell::from_char(c).ok_or_else(|| GridError::Row {
                    row,
                    reason: format!("unexpected character `{c}`"),
                })?;
                grid.set(ix, iy, cell);
            }
        }
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(GridError::Row {
                row: height,
                reason: "trailing data after last row".into(),
            });
        }
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self, GridError> {
        Self::parse_map(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), GridError> {
        std::fs::write(path, self.to_map_string())?;
        Ok(())
    }
}
