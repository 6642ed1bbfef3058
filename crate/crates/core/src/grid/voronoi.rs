use super::edt::squared_edt;
use super::{distance_transform, Cell, OccupancyGrid, UnknownAs};

pub const DEFAULT_ALPHA: f64 = 10.0;
pub const DEFAULT_D_MAX: f64 = 10.0;

/// Obstacle-proximity field in `[0, 1]`: 1 inside obstacles, falling to 0 far
/// from obstacles and on the generalized Voronoi edges between them.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiField {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    values: Vec<f64>,
}

impl VoronoiField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.width + ix]
    }

    pub fn at_world(&self, x: f64, y: f64) -> Option<f64> {
        let fx = ((x - self.origin.0) / self.resolution).floor();
        let fy = ((y - self.origin.1) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some(self.at(fx as usize, fy as usize))
    }
}

/// Field value for obstacle distance `d_o` and Voronoi-edge distance `d_v`.
pub fn voronoi_value(d_o: f64, d_v: f64, alpha: f64, d_max: f64) -> f64 {
    if d_o <= 0.0 {
        return 1.0;
    }
    if d_o > d_max {
        return 0.0;
    }
    let edge_term = if d_v.is_infinite() {
        1.0
    } else {
        d_v / (d_o + d_v)
    };
    alpha / (alpha + d_o) * edge_term * (d_o - d_max).powi(2) / (d_max * d_max)
}

pub fn voronoi_field(grid: &OccupancyGrid, alpha: f64, d_max: f64) -> VoronoiField {
    assert!(alpha > 0.0 && d_max > 0.0, "alpha and d_max must be positive");
    let (w, h) = (grid.width(), grid.height());
    let obstacles = distance_transform(grid, UnknownAs::Free);
    let labels = component_labels(grid);

    // edge cells: free cells whose nearest obstacle belongs to a different
    // component than a 4-neighbor's nearest obstacle
    let label_of = |ix: usize, iy: usize| -> Option<u32> {
        obstacles.nearest_obstacle(ix, iy).map(|i| labels[i])
    };
    let mut edges = vec![false; w * h];
    for iy in 0..h {
        for ix in 0..w {
            if grid.get(ix, iy) == Cell::Occupied {
                continue;
            }
            let Some(own) = label_of(ix, iy) else { continue };
            let neighbors = [
                (ix.wrapping_sub(1), iy),
                (ix + 1, iy),
                (ix, iy.wrapping_sub(1)),
                (ix, iy + 1),
            ];
            edges[iy * w + ix] = neighbors.iter().any(|&(nx, ny)| {
                nx < w
                    && ny < h
                    && grid.get(nx, ny) != Cell::Occupied
                    && label_of(nx, ny).is_some_and(|l| l != own)
            });
        }
    }
    let (edge_sq, _) = squared_edt(w, h, &edges);
    let values = (0..w * h)
        .map(|i| {
            let d_o = obstacles.values()[i];
            let d_v = if edge_sq[i].is_finite() {
                edge_sq[i].sqrt() * grid.resolution()
            } else {
                f64::INFINITY
            };
            if d_o.is_infinite() {
                0.0
            } else {
                voronoi_value(d_o, d_v, alpha, d_max)
            }
        })
        .collect();
    VoronoiField {
        width: w,
        height: h,
        resolution: grid.resolution(),
        origin: grid.origin(),
        values,
    }
}

/// 8-connected component label per cell; meaningful only for occupied cells.
fn component_labels(grid: &OccupancyGrid) -> Vec<u32> {
    let (w, h) = (grid.width(), grid.height());
    let mut labels = vec![u32::MAX; w * h];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if labels[start] != u32::MAX || grid.cells()[start] != Cell::Occupied {
            continue;
        }
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if labels[j] == u32::MAX && grid.cells()[j] == Cell::Occupied {
                        labels[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
        next += 1;
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupied_cell_is_one_and_far_is_zero() {
        let mut g = OccupancyGrid::new(100, 5, 0.25, Cell::Free).unwrap();
        g.set(0, 2, Cell::Occupied);
        let f = voronoi_field(&g, DEFAULT_ALPHA, 5.0);
        assert_eq!(f.at(0, 2), 1.0);
        assert_eq!(f.at(99, 2), 0.0);
        assert!(f.at(4, 2) > 0.0 && f.at(4, 2) < 1.0);
    }

    #[test]
    fn midline_between_walls_is_zero() {
        // walls at rows 0 and 10; row 5 is equidistant
        let mut g = OccupancyGrid::new(20, 11, 0.5, Cell::Free).unwrap();
        for ix in 0..20 {
            g.set(ix, 0, Cell::Occupied);
            g.set(ix, 10, Cell::Occupied);
        }
        let f = voronoi_field(&g, DEFAULT_ALPHA, DEFAULT_D_MAX);
        // d_V = 0 on the midline, so the formula evaluates to exactly 0
        assert_eq!(voronoi_value(2.5, 0.0, DEFAULT_ALPHA, DEFAULT_D_MAX), 0.0);
        assert_eq!(f.at(10, 5), 0.0);
        assert!(f.at(10, 2) > 0.0);
    }

    #[test]
    fn no_obstacles_all_zero() {
        let g = OccupancyGrid::new(10, 10, 1.0, Cell::Free).unwrap();
        let f = voronoi_field(&g, 1.0, 1.0);
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn value_non_increasing_in_obstacle_distance() {
        for &d_v in &[0.1, 1.0, 5.0, f64::INFINITY] {
            let mut prev = 1.0;
            for i in 0..=120 {
                let d_o = i as f64 * 0.1;
                let v = voronoi_value(d_o, d_v, DEFAULT_ALPHA, DEFAULT_D_MAX);
                assert!((0.0..=1.0).contains(&v));
                assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
    }
}
