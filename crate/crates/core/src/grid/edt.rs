use super::{Cell, OccupancyGrid};

/// How unknown cells count when computing obstacle distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownAs {
    Free,
    Occupied,
}

/// Per-cell Euclidean distance (meters) from each cell center to the nearest
/// obstacle cell center; `f64::INFINITY` when there is no obstacle at all.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    values: Vec<f64>,
    nearest: Vec<u32>,
}

pub(crate) const NO_SITE: u32 = u32::MAX;

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.width + ix]
    }

    /// Distance at the cell containing `(x, y)`, `None` outside the grid.
    pub fn at_world(&self, x: f64, y: f64) -> Option<f64> {
        let fx = ((x - self.origin.0) / self.resolution).floor();
        let fy = ((y - self.origin.1) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some(self.at(fx as usize, fy as usize))
    }

    /// Linear index of the obstacle cell nearest to `(ix, iy)`.
    pub fn nearest_obstacle(&self, ix: usize, iy: usize) -> Option<usize> {
        match self.nearest[iy * self.width + ix] {
            NO_SITE => None,
            i => Some(i as usize),
        }
    }
}

/// Exact Euclidean distance transform over obstacle cells.
pub fn distance_transform(grid: &OccupancyGrid, unknown: UnknownAs) -> DistanceField {
    let sites: Vec<bool> = grid
        .cells()
        .iter()
        .map(|&c| match c {
            Cell::Occupied => true,
            Cell::Unknown => unknown == UnknownAs::Occupied,
            Cell::Free => false,
        })
        .collect();
    let (sq, nearest) = squared_edt(grid.width(), grid.height(), &sites);
    DistanceField {
        width: grid.width(),
        height: grid.height(),
        resolution: grid.resolution(),
        origin: grid.origin(),
        values: sq
            .iter()
            .map(|&d| {
                if d.is_finite() {
                    d.sqrt() * grid.resolution()
                } else {
                    f64::INFINITY
                }
            })
            .collect(),
        nearest,
    }
}

/// Squared distances in cell units plus the nearest site index for each cell.
///
/// Separable lower-envelope algorithm: a column pass finds the nearest site
/// in each column, a row pass takes the lower envelope of the parabolas
/// `(q - i)² + g(i)²`.
pub(crate) fn squared_edt(width: usize, height: usize, sites: &[bool]) -> (Vec<f64>, Vec<u32>) {
    let n = width * height;
    // column pass: vertical distance and row of the nearest site per column
    let mut col_d = vec![f64::INFINITY; n];
    let mut col_site = vec![usize::MAX; n];
    for x in 0..width {
        let mut last: Option<usize> = None;
        for y in 0..height {
            if sites[y * width + x] {
                last = Some(y);
            }
            if let Some(s) = last {
                col_d[y * width + x] = (y - s) as f64;
                col_site[y * width + x] = s;
            }
        }
        let mut next: Option<usize> = None;
        for y in (0..height).rev() {
            if sites[y * width + x] {
                next = Some(y);
            }
            if let Some(s) = next {
                let d = (s - y) as f64;
                if d < col_d[y * width + x] {
                    col_d[y * width + x] = d;
                    col_site[y * width + x] = s;
                }
            }
        }
    }

    let mut out = vec![f64::INFINITY; n];
    let mut nearest = vec![NO_SITE; n];
    let mut v = vec![0usize; width];
    let mut z = vec![0.0f64; width + 1];
    let mut f = vec![0.0f64; width];
    for y in 0..height {
        let row = y * width;
        for x in 0..width {
            let d = col_d[row + x];
            f[x] = d * d;
        }
        // envelope over columns that have a site
        let mut k: isize = -1;
        for q in 0..width {
            if !f[q].is_finite() {
                continue;
            }
            loop {
                if k < 0 {
                    k = 0;
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                let p = v[k as usize];
                let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                    / (2.0 * q as f64 - 2.0 * p as f64);
                if s <= z[k as usize] {
                    k -= 1;
                    continue;
                }
                k += 1;
                v[k as usize] = q;
                z[k as usize] = s;
                z[k as usize + 1] = f64::INFINITY;
                break;
            }
        }
        if k < 0 {
            continue;
        }
        let mut j = 0usize;
        for q in 0..width {
            while z[j + 1] < q as f64 {
                j += 1;
            }
            let p = v[j];
            let dq = q as f64 - p as f64;
            out[row + q] = dq * dq + f[p];
            nearest[row + q] = (col_site[row + p] * width + p) as u32;
        }
    }
    (out, nearest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_obstacle_distances() {
        let mut g = OccupancyGrid::new(9, 9, 0.25, Cell::Free).unwrap();
        g.set(4, 4, Cell::Occupied);
        let d = distance_transform(&g, UnknownAs::Free);
        assert_eq!(d.at(4, 4), 0.0);
        assert!((d.at(8, 4) - 1.0).abs() < 1e-12);
        assert!((d.at(4, 0) - 1.0).abs() < 1e-12);
        assert!((d.at(5, 5) - 0.25 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(d.nearest_obstacle(0, 0), Some(4 * 9 + 4));
    }

    #[test]
    fn no_obstacles_is_infinite() {
        let g = OccupancyGrid::new(5, 3, 1.0, Cell::Free).unwrap();
        let d = distance_transform(&g, UnknownAs::Free);
        assert!(d.values().iter().all(|v| v.is_infinite()));
        assert_eq!(d.nearest_obstacle(1, 1), None);
    }

    #[test]
    fn unknown_flag() {
        let mut g = OccupancyGrid::new(5, 1, 1.0, Cell::Free).unwrap();
        g.set(0, 0, Cell::Unknown);
        assert!(distance_transform(&g, UnknownAs::Free).at(4, 0).is_infinite());
        assert_eq!(distance_transform(&g, UnknownAs::Occupied).at(4, 0), 4.0);
    }
}
