//! Builders for the bundled benchmark maps.

use std::path::PathBuf;

use crate::geometry::Pose2D;
use crate::grid::{Cell, OccupancyGrid, DEFAULT_GRID_RESOLUTION};
use crate::sim::{ScenarioFile, ScenarioSpec};

const RES: f64 = DEFAULT_GRID_RESOLUTION;

/// Snaps a coordinate to the nearest fine cell center.
fn center(v: f64) -> f64 {
    ((v / RES).floor() + 0.5) * RES
}

/// Narrow corridor interrupted by a circular plate, closed at the east end.
/// The vehicle starts at the west end facing east and must end near the east
/// end facing west.
pub fn plate_corridor(diameter: f64) -> (OccupancyGrid, Pose2D, Pose2D) {
    let corridor = 3.5;
    let stub = 9.0;
    let yc = center(10.0);
    let start_x = center(3.0);
    // the plate center lies a whole number of primitives from the start
    let pc = start_x + 1.25 * 16.0;
    let end_x = pc + diameter / 2.0 + stub;
    let width = ((end_x + 2.0) / RES).ceil() as usize;
    let mut g = OccupancyGrid::new(width, 128, RES, Cell::Occupied).unwrap();
    g.fill_rect(0.8, yc - corridor / 2.0, end_x, yc + corridor / 2.0, Cell::Free);
    g.fill_disk(pc, yc, diameter / 2.0, Cell::Free);
    let start = Pose2D::new(start_x, yc, 0.0);
    let goal = Pose2D::new(end_x - 3.0, yc, std::f64::consts::PI);
    (g, start, goal)
}

/// Walled 120 m x 75 m site split into three 25 m lanes by two long walls
/// with gaps at alternating ends, and a block in the middle of the first two
/// lanes. The route from the south-west start to the north-east goal
/// serpentines through all lanes and is well over 200 m long.
pub fn large_site() -> (OccupancyGrid, Pose2D, Pose2D) {
    let (w, h) = (120.0, 75.0);
    let mut g = OccupancyGrid::new((w / RES) as usize, (h / RES) as usize, RES, Cell::Free).unwrap();
    outer_walls(&mut g, w, h);
    g.fill_rect(0.0, 24.5, 100.0, 25.5, Cell::Occupied);
    g.fill_rect(20.0, 49.5, w, 50.5, Cell::Occupied);
    g.fill_rect(60.0, 9.5, 68.0, 15.5, Cell::Occupied);
    g.fill_rect(36.0, 34.5, 44.0, 40.5, Cell::Occupied);
    let start = Pose2D::new(center(8.0), center(12.5), 0.0);
    let goal = Pose2D::new(center(110.0), center(62.5), 0.0);
    (g, start, goal)
}

fn outer_walls(g: &mut OccupancyGrid, w: f64, h: f64) {
    let t = 1.0;
    g.fill_rect(0.0, 0.0, w, t, Cell::Occupied);
    g.fill_rect(0.0, h - t, w, h, Cell::Occupied);
    g.fill_rect(0.0, 0.0, t, h, Cell::Occupied);
    g.fill_rect(w - t, 0.0, w, h, Cell::Occupied);
}

/// Walled 100 m x 24 m hall with a long island in its southern half. The
/// start and goal lie on the same row north of the island, but a wall at the
/// island's east end closes the northern passage. Once the vehicle sees that
/// wall, the 2D route flips to the southern passage.
pub fn divergence_hall() -> (OccupancyGrid, Pose2D, Pose2D) {
    let (w, h) = (100.0, 24.0);
    let mut g = OccupancyGrid::new((w / RES) as usize, (h / RES) as usize, RES, Cell::Free).unwrap();
    outer_walls(&mut g, w, h);
    let (x0, y0, x1, y1) = DIVERGENCE_ISLAND;
    g.fill_rect(x0, y0, x1, y1, Cell::Occupied);
    let (x0, y0, x1, y1) = DIVERGENCE_WALL;
    g.fill_rect(x0, y0, x1, y1, Cell::Occupied);
    let start = Pose2D::new(center(6.0), center(16.5), 0.0);
    let goal = Pose2D::new(center(93.0), center(16.5), 0.0);
    (g, start, goal)
}

/// Island of [`divergence_hall`] as `(x0, y0, x1, y1)`.
pub const DIVERGENCE_ISLAND: (f64, f64, f64, f64) = (50.0, 6.0, 80.0, 12.5);
/// Wall closing the passage north of the island.
pub const DIVERGENCE_WALL: (f64, f64, f64, f64) = (78.0, 12.5, 79.0, 23.0);

/// A scenario as shipped in the `scenarios/` directory.
pub struct Bundled {
    pub name: &'static str,
    pub map: OccupancyGrid,
    pub file: ScenarioFile,
}

fn bundled_one(name: &'static str, map_name: &str, (map, start, goal): (OccupancyGrid, Pose2D, Pose2D), known_env: bool) -> Bundled {
    Bundled {
        name,
        map,
        file: ScenarioFile {
            map: PathBuf::from(map_name),
            start,
            goal,
            known_env,
            sensor_range: 30.0,
            n_rays: 1440,
            drive_step: 1.0,
            max_sim_steps: 2000,
        },
    }
}

/// Every bundled scenario, keyed by file stem.
pub fn bundled() -> Vec<Bundled> {
    let mut unknown_large = bundled_one("unknown_large", "large_site.map", large_site(), false);
    unknown_large.file.sensor_range = 80.0;
    unknown_large.file.n_rays = 2880;
    let mut divergence = bundled_one("divergence", "divergence_hall.map", divergence_hall(), false);
    divergence.file.sensor_range = 50.0;
    divergence.file.n_rays = 2880;
    vec![
        bundled_one("known_large", "large_site.map", large_site(), true),
        unknown_large,
        bundled_one("plate_8_4", "plate_8_4.map", plate_corridor(8.4), true),
        bundled_one("plate_6_7", "plate_6_7.map", plate_corridor(6.7), true),
        divergence,
    ]
}

impl Bundled {
    pub fn spec(&self) -> ScenarioSpec {
        ScenarioSpec::from_file(&self.file, self.map.clone())
    }
}
