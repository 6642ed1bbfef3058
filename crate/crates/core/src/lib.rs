//! Guided and extended Hybrid A* path planning.
//!
//! The crate bundles the planner itself, the occupancy-grid world it plans
//! in, a closed-loop exploration simulator and the benchmark CLI plumbing.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod heuristic;
pub mod mission;
pub mod path;
pub mod planner;
pub mod scenarios;
pub mod sim;
pub mod vehicle;

pub use error::*;
pub use geometry::{normalize_angle, wrap_angle, Direction, PathSample, Pose2D};
pub use grid::{Cell, OccupancyGrid};
