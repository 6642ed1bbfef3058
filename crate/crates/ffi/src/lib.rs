//! C interface to the planner: opaque grid and path handles, status codes and
//! a per-thread error message.
//!
//! Every function returning [`HaStatus`] leaves its out-parameters untouched
//! unless it returns `HA_STATUS_OK`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hybrid_astar::cli::{execute, write_outputs, CliError, RunConfig};
use hybrid_astar::error::{HeuristicError, PlanError};
use hybrid_astar::path::PlannedPath;
use hybrid_astar::planner::{plan, PlannerConfig, PlannerMode, StopRule};
use hybrid_astar::sim::ScenarioError;
use hybrid_astar::vehicle::VehicleSpec;
use hybrid_astar::{Cell, OccupancyGrid, Pose2D};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    NoPath = 5,
    BudgetExceeded = 6,
    StartInCollision = 7,
    GoalInCollision = 8,
    Internal = 9,
}

/// Cell values accepted by the grid functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaCell {
    Free = 0,
    Occupied = 1,
    Unknown = 2,
}

/// Planner modes accepted by [`ha_plan`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaMode {
    Standard = 0,
    Extended = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaPose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HaMetrics {
    pub kappa_dot_rms: f64,
    pub kappa_dot_max_abs: f64,
    pub p_max: f64,
    pub p_avg: f64,
    pub length: f64,
    pub t_max: f64,
    pub t_cum: f64,
    pub t_avg: f64,
    pub n_planner_calls: usize,
    pub cumulative_nodes: usize,
    pub n_direction_switches: usize,
    pub n_rotations: usize,
    pub reached: bool,
}

/// Occupancy grid handle.
pub struct HaGrid(OccupancyGrid);

/// Planned path handle.
pub struct HaPath {
    path: PlannedPath,
    poses: Vec<Pose2D>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(HaStatus, String);

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        let status = match e {
            PlanError::NoPath | PlanError::Heuristic(HeuristicError::NoRoute) => HaStatus::NoPath,
            PlanError::BudgetExceeded => HaStatus::BudgetExceeded,
            PlanError::StartInCollision => HaStatus::StartInCollision,
            PlanError::GoalInCollision | PlanError::Heuristic(_) => HaStatus::GoalInCollision,
        };
        Failure(status, e.to_string())
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match &e {
            CliError::Read { .. } | CliError::Write { .. } => HaStatus::Io,
            CliError::Scenario(ScenarioError::Io { .. }) => HaStatus::Io,
            CliError::Parse { .. } | CliError::Scenario(ScenarioError::Parse { .. } | ScenarioError::Map { .. }) => {
                HaStatus::Parse
            }
            CliError::Config(_) | CliError::Scenario(ScenarioError::Config(_)) | CliError::Usage(_) => {
                HaStatus::InvalidArgument
            }
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(HaStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(HaStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HaStatus::Internal
        }
    }
}

fn cell_from(value: u32) -> Result<Cell, Failure> {
    match value {
        0 => Ok(Cell::Free),
        1 => Ok(Cell::Occupied),
        2 => Ok(Cell::Unknown),
        v => Err(invalid(format!("cell value {v}"))),
    }
}

unsafe fn path_arg<'a>(s: *const c_char, what: &str) -> Result<&'a Path, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    let text = CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))?;
    Ok(Path::new(text))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ha_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a grid filled with `fill` (an [`HaCell`] value).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ha_grid_new(
    width: usize,
    height: usize,
    resolution: f64,
    fill: u32,
    out: *mut *mut HaGrid,
) -> HaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = OccupancyGrid::new(width, height, resolution, cell_from(fill)?).map_err(|e| invalid(e.to_string()))?;
        *out = Box::into_raw(Box::new(HaGrid(grid)));
        Ok(())
    })
}

/// Reads a map file.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ha_grid_load(path: *const c_char, out: *mut *mut HaGrid) -> HaStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = OccupancyGrid::load(path).map_err(|e| match e {
            hybrid_astar::error::GridError::Io(io) => Failure(HaStatus::Io, io.to_string()),
            other => Failure(HaStatus::Parse, other.to_string()),
        })?;
        *out = Box::into_raw(Box::new(HaGrid(grid)));
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ha_grid_set(grid: *mut HaGrid, ix: usize, iy: usize, cell: u32) -> HaStatus {
    guard(|| {
        let grid = grid.as_mut().ok_or_else(|| null("grid"))?;
        if ix >= grid.0.width() || iy >= grid.0.height() {
            return Err(invalid(format!("cell ({ix}, {iy}) outside the grid")));
        }
        grid.0.set(ix, iy, cell_from(cell)?);
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ha_grid_get(grid: *const HaGrid, ix: usize, iy: usize, out: *mut u32) -> HaStatus {
    guard(|| {
        let grid = grid.as_ref().ok_or_else(|| null("grid"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if ix >= grid.0.width() || iy >= grid.0.height() {
            return Err(invalid(format!("cell ({ix}, {iy}) outside the grid")));
        }
        *out = match grid.0.get(ix, iy) {
            Cell::Free => HaCell::Free,
            Cell::Occupied => HaCell::Occupied,
            Cell::Unknown => HaCell::Unknown,
        } as u32;
        Ok(())
    })
}

/// Fills the axis-aligned rectangle (world meters) with `cell`.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ha_grid_fill_rect(grid: *mut HaGrid, x0: f64, y0: f64, x1: f64, y1: f64, cell: u32) -> HaStatus {
    guard(|| {
        let grid = grid.as_mut().ok_or_else(|| null("grid"))?;
        grid.0.fill_rect(x0, y0, x1, y1, cell_from(cell)?);
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ha_grid_free(grid: *mut HaGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Plans from `start` to `goal` with the default planner settings and the
/// U-Shift vehicle. `mode` is an [`HaMode`] value.
///
/// # Safety
/// `grid` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ha_plan(
    grid: *const HaGrid,
    start: HaPose,
    goal: HaPose,
    mode: u32,
    out: *mut *mut HaPath,
) -> HaStatus {
    guard(|| {
        let grid = grid.as_ref().ok_or_else(|| null("grid"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mode = match mode {
            0 => PlannerMode::Standard,
            1 => PlannerMode::Extended,
            m => return Err(invalid(format!("mode {m}"))),
        };
        let pose = |p: HaPose| {
            if [p.x, p.y, p.yaw].iter().all(|v| v.is_finite()) {
                Ok(Pose2D::new(p.x, p.y, p.yaw))
            } else {
                Err(invalid("non-finite pose"))
            }
        };
        let (start, goal) = (pose(start)?, pose(goal)?);
        let out_plan = plan(
            &grid.0,
            &start,
            &goal,
            &PlannerConfig::default(),
            &VehicleSpec::ushift(),
            mode,
            StopRule::Goal,
        );
        let path = out_plan.result?;
        let poses = path.poses();
        *out = Box::into_raw(Box::new(HaPath { path, poses }));
        Ok(())
    })
}

/// # Safety
/// `path` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ha_path_length(path: *const HaPath, out: *mut f64) -> HaStatus {
    guard(|| {
        let path = path.as_ref().ok_or_else(|| null("path"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = path.path.total_drive_length();
        Ok(())
    })
}

/// Number of poses along the path, 0 for a null handle.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ha_path_pose_count(path: *const HaPath) -> usize {
    path.as_ref().map_or(0, |p| p.poses.len())
}

/// # Safety
/// `path` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ha_path_pose(path: *const HaPath, index: usize, out: *mut HaPose) -> HaStatus {
    guard(|| {
        let path = path.as_ref().ok_or_else(|| null("path"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = path
            .poses
            .get(index)
            .ok_or_else(|| invalid(format!("pose index {index} of {}", path.poses.len())))?;
        *out = HaPose {
            x: p.x,
            y: p.y,
            yaw: p.yaw,
        };
        Ok(())
    })
}

/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ha_path_rotation_count(path: *const HaPath) -> usize {
    path.as_ref().map_or(0, |p| p.path.n_rotations())
}

/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ha_path_direction_switches(path: *const HaPath) -> usize {
    path.as_ref().map_or(0, |p| p.path.n_direction_switches())
}

/// The path in the `path.json` layout. Release with [`ha_string_free`].
///
/// # Safety
/// `path` must be null or a live handle; `out` must be null or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn ha_path_to_json(path: *const HaPath, out: *mut *mut c_char) -> HaStatus {
    guard(|| {
        let path = path.as_ref().ok_or_else(|| null("path"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let json = serde_json::to_string_pretty(&path.path).map_err(|e| Failure(HaStatus::Internal, e.to_string()))?;
        *out = CString::new(json).map_err(|e| invalid(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `path` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ha_path_free(path: *mut HaPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ha_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs a JSON run config like `plan run` and writes the same output files.
/// Returns `HA_STATUS_OK` whenever the run completes; `metrics.reached` tells
/// whether the goal was reached.
///
/// # Safety
/// `config_path` must be null or a NUL-terminated string; `metrics` must be
/// null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ha_run_config(config_path: *const c_char, no_timing: bool, metrics: *mut HaMetrics) -> HaStatus {
    guard(|| {
        let path = path_arg(config_path, "config_path")?;
        let metrics = metrics.as_mut().ok_or_else(|| null("metrics"))?;
        let cfg = RunConfig::load(path)?;
        let (spec, result) = execute(&cfg)?;
        write_outputs(&cfg.output_dir, &spec, &result, no_timing)?;
        let m = &result.report;
        let t = |v: f64| if no_timing { 0.0 } else { v };
        *metrics = HaMetrics {
            kappa_dot_rms: m.kappa_dot_rms,
            kappa_dot_max_abs: m.kappa_dot_max_abs,
            p_max: m.p_max,
            p_avg: m.p_avg,
            length: m.length,
            t_max: t(m.t_max),
            t_cum: t(m.t_cum),
            t_avg: t(m.t_avg),
            n_planner_calls: m.n_planner_calls,
            cumulative_nodes: m.cumulative_nodes,
            n_direction_switches: m.n_direction_switches,
            n_rotations: m.n_rotations,
            reached: m.reached,
        };
        Ok(())
    })
}
