//! Exact rectangle-versus-cell overlap by separating axes.

use hybrid_astar::path::{PlannedPath, Segment};
use hybrid_astar::vehicle::VehicleSpec;
use hybrid_astar::{Cell, OccupancyGrid, Pose2D};

fn project(points: &[(f64, f64)], axis: (f64, f64)) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = p.0 * axis.0 + p.1 * axis.1;
        (lo.min(d), hi.max(d))
    })
}

/// True when the footprint rectangle and the closed square of cell `(ix, iy)`
/// share a point.
pub fn rect_overlaps_cell(spec: &VehicleSpec, pose: &Pose2D, grid: &OccupancyGrid, ix: usize, iy: usize) -> bool {
    let rect = spec.corners(pose);
    let r = grid.resolution();
    let (ox, oy) = grid.origin();
    let x0 = ox + ix as f64 * r;
    let y0 = oy + iy as f64 * r;
    let square = [(x0, y0), (x0 + r, y0), (x0 + r, y0 + r), (x0, y0 + r)];
    let (s, c) = pose.yaw.sin_cos();
    [(1.0, 0.0), (0.0, 1.0), (c, s), (-s, c)].iter().all(|&axis| {
        let a = project(&rect, axis);
        let b = project(&square, axis);
        a.0 <= b.1 && b.0 <= a.1
    })
}

/// Occupied cells overlapped by the footprint at `pose`.
pub fn overlapped_occupied(spec: &VehicleSpec, pose: &Pose2D, grid: &OccupancyGrid) -> Vec<(usize, usize)> {
    let corners = spec.corners(pose);
    let r = grid.resolution();
    let (ox, oy) = grid.origin();
    let lo_x = corners.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi_x = corners.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let lo_y = corners.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi_y = corners.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let clamp_x = |v: f64| (((v - ox) / r).floor().max(0.0) as usize).min(grid.width() - 1);
    let clamp_y = |v: f64| (((v - oy) / r).floor().max(0.0) as usize).min(grid.height() - 1);
    let mut hits = Vec::new();
    for iy in clamp_y(lo_y)..=clamp_y(hi_y) {
        for ix in clamp_x(lo_x)..=clamp_x(hi_x) {
            if grid.get(ix, iy) == Cell::Occupied && rect_overlaps_cell(spec, pose, grid, ix, iy) {
                hits.push((ix, iy));
            }
        }
    }
    hits
}

/// Whether the footprint leaves the grid at `pose`.
pub fn leaves_grid(spec: &VehicleSpec, pose: &Pose2D, grid: &OccupancyGrid) -> bool {
    let (ox, oy) = grid.origin();
    spec.corners(pose).iter().any(|&(x, y)| {
        x < ox || y < oy || x > ox + grid.world_width() || y > oy + grid.world_height()
    })
}

/// Footprint overlaps along a path: every drive sample plus each rotation
/// swept in 64 steps.
pub fn path_violations(spec: &VehicleSpec, path: &PlannedPath, grid: &OccupancyGrid) -> usize {
    let mut bad = 0;
    for seg in &path.segments {
        match seg {
            Segment::Drive(d) => {
                for sample in &d.samples {
                    if !overlapped_occupied(spec, &sample.pose, grid).is_empty() {
                        bad += 1;
                    }
                }
            }
            Segment::Rotation(r) => {
                for k in 0..=64 {
                    let p = Pose2D::new(r.x, r.y, r.from_yaw + r.delta * k as f64 / 64.0);
                    if !overlapped_occupied(spec, &p, grid).is_empty() {
                        bad += 1;
                    }
                }
            }
        }
    }
    bad
}
