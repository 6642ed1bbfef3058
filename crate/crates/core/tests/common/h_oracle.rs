//! Cost-to-goal on the coarse planning grid by Bellman-Ford relaxation.

use std::f64::consts::SQRT_2;

use hybrid_astar::{Cell, OccupancyGrid};

/// Coarse cells are `factor × factor` blocks of fine cells. A block is
/// blocked when any of its fine cells is occupied or has its center closer
/// than `inflation` to the center of an occupied cell.
pub fn cost_to_goal(grid: &OccupancyGrid, factor: usize, goal: (usize, usize), inflation: f64) -> Vec<f64> {
    let res = grid.resolution() * factor as f64;
    let (w, h) = (grid.width().div_ceil(factor), grid.height().div_ceil(factor));
    let reach = (inflation / grid.resolution()).ceil() as i64;
    let near_obstacle = |fx: usize, fy: usize| {
        if grid.get(fx, fy) == Cell::Occupied {
            return true;
        }
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (x, y) = (fx as i64 + dx, fy as i64 + dy);
                if !grid.in_bounds(x, y) || grid.get(x as usize, y as usize) != Cell::Occupied {
                    continue;
                }
                if ((dx * dx + dy * dy) as f64).sqrt() * grid.resolution() < inflation {
                    return true;
                }
            }
        }
        false
    };
    let blocked: Vec<bool> = (0..w * h)
        .map(|i| {
            let (cx, cy) = (i % w, i / w);
            (0..factor * factor).any(|k| {
                let (fx, fy) = (cx * factor + k % factor, cy * factor + k / factor);
                fx < grid.width() && fy < grid.height() && near_obstacle(fx, fy)
            })
        })
        .collect();
    let mut v = vec![f64::INFINITY; w * h];
    v[goal.1 * w + goal.0] = 0.0;
    loop {
        let mut changed = false;
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let i = y as usize * w + x as usize;
                if blocked[i] {
                    continue;
                }
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        let (nx, ny) = (x + dx, y + dy);
                        if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let n = ny as usize * w + nx as usize;
                        let c = if dx != 0 && dy != 0 { res * SQRT_2 } else { res };
                        if v[n] + c < v[i] - 1e-12 {
                            v[i] = v[n] + c;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return v;
        }
    }
}

/// Oracle value at a world position, `INFINITY` outside the grid.
pub fn value_at(values: &[f64], grid: &OccupancyGrid, factor: usize, x: f64, y: f64) -> f64 {
    let res = grid.resolution() * factor as f64;
    let (ox, oy) = grid.origin();
    let w = grid.width().div_ceil(factor);
    let (fx, fy) = (((x - ox) / res).floor(), ((y - oy) / res).floor());
    if fx < 0.0 || fy < 0.0 || fx as usize >= w || fy as usize >= values.len() / w {
        return f64::INFINITY;
    }
    values[fy as usize * w + fx as usize]
}
