//! Obstacle-aware 2D cost-to-goal field, path extraction and divergence checks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use crate::error::HeuristicError;
use crate::geometry::Pose2D;
use crate::grid::{distance_transform, Cell, OccupancyGrid, UnknownAs};

/// Default coarse resolution of the 2D search, equal to the Hybrid A* cell size.
pub const DEFAULT_PLANNING_RESOLUTION: f64 = 0.625;
/// Default obstacle inflation, half the vehicle width.
pub const DEFAULT_INFLATION: f64 = 1.0;
/// Arc-length step used to match two paths.
pub const DIVERGENCE_STEP: f64 = 0.625;

/// Neighbor offsets in row-major order of the neighbor's linear index.
const NEIGHBORS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseCell {
    Free,
    /// Blocked only by inflation.
    Inflated,
    Occupied,
}

/// Cost-to-goal on a coarse grid.
#[derive(Debug, Clone)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    goal_cell: (usize, usize),
    cells: Vec<CoarseCell>,
    values: Vec<f64>,
    /// `values` continued into inflated cells, used for poses that legally sit
    /// closer to obstacles than the inflation radius.
    extended: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn build_distance_map(
    belief: &OccupancyGrid,
    goal: &Pose2D,
    planning_resolution: f64,
) -> Result<DistanceMap, HeuristicError> {
    build_distance_map_inflated(belief, goal, planning_resolution, DEFAULT_INFLATION)
}

/// Like [`build_distance_map`] with an explicit inflation radius in meters.
pub fn build_distance_map_inflated(
    belief: &OccupancyGrid,
    goal: &Pose2D,
    planning_resolution: f64,
    inflation: f64,
) -> Result<DistanceMap, HeuristicError> {
    assert!(planning_resolution > 0.0, "planning resolution must be positive");
    let (ox, oy) = belief.origin();
    let width = (belief.world_width() / planning_resolution - 1e-9).ceil().max(1.0) as usize;
    let height = (belief.world_height() / planning_resolution - 1e-9).ceil().max(1.0) as usize;

    let field = distance_transform(belief, UnknownAs::Free);
    let mut cells = vec![CoarseCell::Free; width * height];
    for iy in 0..belief.height() {
        for ix in 0..belief.width() {
            let i = belief.index(ix, iy);
            let kind = if belief.cells()[i] == Cell::Occupied {
                CoarseCell::Occupied
            } else if field.values()[i] < inflation {
                CoarseCell::Inflated
            } else {
                continue;
            };
            let (x, y) = belief.cell_center(ix, iy);
            let cx = (((x - ox) / planning_resolution) as usize).min(width - 1);
            let cy = (((y - oy) / planning_resolution) as usize).min(height - 1);
            let c = &mut cells[cy * width + cx];
            if kind == CoarseCell::Occupied || *c == CoarseCell::Free {
                *c = kind;
            }
        }
    }

    let fx = ((goal.x - ox) / planning_resolution).floor();
    let fy = ((goal.y - oy) / planning_resolution).floor();
    if !(fx >= 0.0 && fy >= 0.0 && fx < width as f64 && fy < height as f64) {
        return Err(HeuristicError::GoalOutside);
    }
    let goal_cell = (fx as usize, fy as usize);
    let goal_index = goal_cell.1 * width + goal_cell.0;
    if cells[goal_index] != CoarseCell::Free {
        return Err(HeuristicError::GoalBlocked);
    }

    let mut values = vec![f64::INFINITY; width * height];
    values[goal_index] = 0.0;
    flood(width, height, planning_resolution, &mut values, vec![goal_index], |i| {
        cells[i] == CoarseCell::Free
    });

    let mut extended = values.clone();
    let seeds = (0..width * height).filter(|&i| values[i].is_finite()).collect();
    flood(width, height, planning_resolution, &mut extended, seeds, |i| {
        cells[i] == CoarseCell::Inflated
    });

    Ok(DistanceMap {
        width,
        height,
        resolution: planning_resolution,
        origin: (ox, oy),
        goal_cell,
        cells,
        values,
        extended,
    })
}

/// Dijkstra relaxation from `seeds` into cells accepted by `passable`.
fn flood(
    width: usize,
    height: usize,
    res: f64,
    values: &mut [f64],
    seeds: Vec<usize>,
    passable: impl Fn(usize) -> bool,
) {
    let mut heap: BinaryHeap<Entry> = seeds
        .into_iter()
        .map(|index| Entry {
            cost: values[index],
            index,
        })
        .collect();
    while let Some(Entry { cost, index }) = heap.pop() {
        if cost > values[index] {
            continue;
        }
        let (x, y) = ((index % width) as i64, (index / width) as i64);
        for (dx, dy) in NEIGHBORS {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                continue;
            }
            let n = ny as usize * width + nx as usize;
            if !passable(n) {
                continue;
            }
            let step = if dx != 0 && dy != 0 { res * SQRT_2 } else { res };
            let next = cost + step;
            if next < values[n] {
                values[n] = next;
                heap.push(Entry { cost: next, index: n });
            }
        }
    }
}

impl DistanceMap {
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

    pub fn goal_cell(&self) -> (usize, usize) {
        self.goal_cell
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_kind(&self, ix: usize, iy: usize) -> CoarseCell {
        self.cells[iy * self.width + ix]
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.width + ix]
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
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

    /// Cost-to-goal at a world position, `INFINITY` outside the grid or
    /// without a route. Positions in inflated cells get the continued value.
    pub fn h_at(&self, x: f64, y: f64) -> f64 {
        match self.cell_of(x, y) {
            Some((ix, iy)) => self.extended[iy * self.width + ix],
            None => f64::INFINITY,
        }
    }
}

/// 2D path over coarse cell centers, start to goal.
#[derive(Debug, Clone, PartialEq)]
pub struct AStarPath {
    pub points: Vec<(f64, f64)>,
    pub cumulative_s: Vec<f64>,
}

impl AStarPath {
    pub fn from_points(points: Vec<(f64, f64)>) -> Self {
        let mut cumulative_s = Vec::with_capacity(points.len());
        let mut s = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                let q = points[i - 1];
                s += (p.0 - q.0).hypot(p.1 - q.1);
            }
            cumulative_s.push(s);
        }
        AStarPath { points, cumulative_s }
    }

    pub fn length(&self) -> f64 {
        self.cumulative_s.last().copied().unwrap_or(0.0)
    }

    /// Position at arc length `s`, clamped to the path.
    pub fn point_at(&self, s: f64) -> (f64, f64) {
        let n = self.points.len();
        if n == 1 || s <= 0.0 {
            return self.points[0];
        }
        if s >= self.length() {
            return self.points[n - 1];
        }
        let i = self.segment_index(s);
        let (a, b) = (self.points[i], self.points[i + 1]);
        let t = (s - self.cumulative_s[i]) / (self.cumulative_s[i + 1] - self.cumulative_s[i]);
        (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
    }

    /// Segment owning arc length `s`; a shared vertex belongs to the later segment.
    fn segment_index(&self, s: f64) -> usize {
        let last = self.points.len() - 2;
        let k = self.cumulative_s.partition_point(|&c| c <= s);
        k.saturating_sub(1).min(last)
    }
}

/// Follows the steepest descent of the cost-to-goal from the start cell.
pub fn extract_astar_path(map: &DistanceMap, start: &Pose2D) -> Result<AStarPath, HeuristicError> {
    let (mut x, mut y) = map.cell_of(start.x, start.y).ok_or(HeuristicError::NoRoute)?;
    let w = map.width;
    if map.extended[y * w + x].is_infinite() {
        return Err(HeuristicError::NoRoute);
    }
    let mut points = vec![map.cell_center(x, y)];
    while (x, y) != map.goal_cell {
        let here = map.extended[y * w + x];
        // free cells descend over the plain field, inflated ones may leave
        // toward it
        let from_free = map.cells[y * w + x] == CoarseCell::Free;
        let mut best: Option<(f64, usize, usize)> = None;
        for (dx, dy) in NEIGHBORS {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= map.height as i64 {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if from_free && map.cells[ny * w + nx] != CoarseCell::Free {
                continue;
            }
            let v = map.extended[ny * w + nx];
            if v >= here {
                continue;
            }
            let step = if dx != 0 && dy != 0 {
                map.resolution * SQRT_2
            } else {
                map.resolution
            };
            let through = v + step;
            if best.is_none_or(|(b, _, _)| through < b) {
                best = Some((through, nx, ny));
            }
        }
        // a finite non-goal cell always has a strictly lower neighbor
        let (_, nx, ny) = best.ok_or(HeuristicError::NoRoute)?;
        x = nx;
        y = ny;
        points.push(map.cell_center(x, y));
    }
    Ok(AStarPath::from_points(points))
}

/// Pose on the path at arc length `min(s_w, length)`, heading along the
/// segment that contains it.
pub fn waypose_at(path: &AStarPath, s_w: f64) -> Result<Pose2D, HeuristicError> {
    if path.points.len() < 2 {
        return Err(HeuristicError::PathTooShort);
    }
    let s = s_w.clamp(0.0, path.length());
    let i = path.segment_index(s);
    let (a, b) = (path.points[i], path.points[i + 1]);
    let (x, y) = path.point_at(s);
    Ok(Pose2D::new(x, y, (b.1 - a.1).atan2(b.0 - a.0)))
}

/// First arc length along `prev` at which the two paths, matched by arc
/// length, are more than `d_div` apart.
pub fn detect_divergence(prev: &AStarPath, curr: &AStarPath, d_div: f64) -> Option<f64> {
    let common = prev.length().min(curr.length());
    let n = (common / DIVERGENCE_STEP + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * DIVERGENCE_STEP).find(|&s| {
        let (a, b) = (prev.point_at(s), curr.point_at(s));
        (a.0 - b.0).hypot(a.1 - b.1) > d_div
    })
}
