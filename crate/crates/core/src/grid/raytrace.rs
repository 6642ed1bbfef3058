use std::f64::consts::PI;

use super::{Cell, OccupancyGrid};
use crate::geometry::Pose2D;

/// Casts `n_rays` evenly spaced rays from the sensor position and copies what
/// they see from `truth` into `belief`.
///
/// Each ray marks cells free until the first occupied truth cell, which is
/// marked occupied and ends the ray. Returns the number of belief cells that
/// were unknown before the call. Known belief cells are never reset.
pub fn raytrace_reveal(
    truth: &OccupancyGrid,
    belief: &mut OccupancyGrid,
    sensor: &Pose2D,
    range: f64,
    n_rays: usize,
) -> usize {
    assert!(truth.same_shape(belief), "truth and belief must share shape");
    assert!(range > 0.0, "sensor range must be positive");
    let Some(_) = truth.world_to_cell(sensor.x, sensor.y) else {
        return 0;
    };
    let mut revealed = 0;
    for k in 0..n_rays {
        let bearing = sensor.yaw + 2.0 * PI * k as f64 / n_rays as f64;
        cast(truth, sensor.x, sensor.y, bearing, range, |ix, iy| {
            let seen = truth.get(ix, iy);
            if belief.get(ix, iy) == Cell::Unknown {
                belief.set(ix, iy, seen);
                revealed += 1;
            }
            seen != Cell::Occupied
        });
    }
    revealed
}

/// Grid traversal (Amanatides-Woo) from `(x, y)` along `bearing` for at most
/// `range` meters. `visit` returns false to stop the ray.
fn cast(
    grid: &OccupancyGrid,
    x: f64,
    y: f64,
    bearing: f64,
    range: f64,
    mut visit: impl FnMut(usize, usize) -> bool,
) {
    let res = grid.resolution();
    let (ox, oy) = grid.origin();
    let (dx, dy) = (bearing.cos(), bearing.sin());
    let Some((cx, cy)) = grid.world_to_cell(x, y) else {
        return;
    };
    let (mut ix, mut iy) = (cx as i64, cy as i64);
    let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dy > 0.0 { 1 } else { -1 };
    let boundary = |i: i64, step: i64, origin: f64| origin + (i + i64::from(step > 0)) as f64 * res;
    let mut t_max_x = if dx.abs() < 1e-12 {
        f64::INFINITY
    } else {
        (boundary(ix, step_x, ox) - x) / dx
    };
    let mut t_max_y = if dy.abs() < 1e-12 {
        f64::INFINITY
    } else {
        (boundary(iy, step_y, oy) - y) / dy
    };
    let t_delta_x = if dx.abs() < 1e-12 { f64::INFINITY } else { res / dx.abs() };
    let t_delta_y = if dy.abs() < 1e-12 { f64::INFINITY } else { res / dy.abs() };
    loop {
        if !visit(ix as usize, iy as usize) {
            return;
        }
        let t;
        if t_max_x < t_max_y {
            t = t_max_x;
            t_max_x += t_delta_x;
            ix += step_x;
        } else {
            t = t_max_y;
            t_max_y += t_delta_y;
            iy += step_y;
        }
        if t > range || !grid.in_bounds(ix, iy) {
            return;
        }
    }
}
