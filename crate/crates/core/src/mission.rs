//! Replanning policy: when to plan again, from where and towards what.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, MissionError};
use crate::geometry::Pose2D;
use crate::grid::{distance_transform, DistanceField, OccupancyGrid, UnknownAs};
use crate::heuristic::{
    build_distance_map_inflated, detect_divergence, extract_astar_path, waypose_at, AStarPath,
};
use crate::path::{PathCursor, PlannedPath, Segment};
use crate::planner::{plan_with, PlannerConfig, PlannerMode, SearchStats, StopRule};
use crate::vehicle::{make_disk_set, pose_collides, rotation_collides, DiskSet, VehicleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavMode {
    /// Plan to a sub-goal sampled on the 2D path.
    Waypoint,
    /// Stop the search once the 2D distance has dropped by `s_w`.
    EarlyStop,
    /// Always plan to the final goal.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionConfig {
    pub s_w: f64,
    pub s_lim: f64,
    /// Navigation refresh distance.
    pub s_t: f64,
    pub d_div: f64,
    pub alpha: f64,
    pub s_coll: f64,
    /// Navigation used by the guided modes.
    pub nav_mode: NavMode,
}

impl Default for MissionConfig {
    fn default() -> Self {
        MissionConfig {
            s_w: 55.0,
            s_lim: 60.0,
            s_t: 10.0,
            d_div: 5.0,
            alpha: 0.5,
            s_coll: 20.0,
            nav_mode: NavMode::EarlyStop,
        }
    }
}

impl MissionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (v, name) in [
            (self.s_w, "mission.s_w"),
            (self.s_lim, "mission.s_lim"),
            (self.s_t, "mission.s_t"),
            (self.d_div, "mission.d_div"),
            (self.s_coll, "mission.s_coll"),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::new(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::new(
                "mission.alpha",
                format!("must lie in (0, 1), got {}", self.alpha),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplanCause {
    Initial,
    Collision,
    Divergence,
    Refresh,
    GoalMode,
}

impl fmt::Display for ReplanCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReplanCause::Initial => "initial",
            ReplanCause::Collision => "collision",
            ReplanCause::Divergence => "divergence",
            ReplanCause::Refresh => "refresh",
            ReplanCause::GoalMode => "goal_mode",
        })
    }
}

#[derive(Debug, Clone)]
pub struct MissionState {
    pub current_path: Option<PlannedPath>,
    pub cursor: PathCursor,
    pub prev_astar: Option<AStarPath>,
    /// 2D distance to the goal at the last tick.
    pub s_g: f64,
    pub last_replan_progress: f64,
    /// Whether the current path was planned to the final goal.
    pub targets_goal: bool,
    start: Pose2D,
}

impl MissionState {
    pub fn new(start: Pose2D) -> Self {
        MissionState {
            current_path: None,
            cursor: PathCursor::START,
            prev_astar: None,
            s_g: f64::INFINITY,
            last_replan_progress: 0.0,
            targets_goal: false,
            start,
        }
    }

    pub fn vehicle_pose(&self) -> Pose2D {
        match &self.current_path {
            Some(p) => p.pose_at(self.cursor),
            None => self.start,
        }
    }

    pub fn progress_s(&self) -> f64 {
        self.current_path
            .as_ref()
            .map_or(0.0, |p| p.drive_s(self.cursor))
    }
}

/// Everything a tick needs besides the mutable state and the belief.
#[derive(Debug, Clone)]
pub struct Mission {
    pub config: MissionConfig,
    pub planner: PlannerConfig,
    pub vehicle: VehicleSpec,
    pub mode: PlannerMode,
    /// Guided modes navigate with `config.nav_mode` and use every trigger;
    /// otherwise only path collisions trigger a replan.
    pub guided: bool,
    pub goal: Pose2D,
    disks: DiskSet,
}

impl Mission {
    pub fn new(
        config: MissionConfig,
        planner: PlannerConfig,
        vehicle: VehicleSpec,
        mode: PlannerMode,
        guided: bool,
        goal: Pose2D,
    ) -> Self {
        let disks = make_disk_set(&vehicle);
        Mission {
            config,
            planner,
            vehicle,
            mode,
            guided,
            goal,
            disks,
        }
    }

    pub fn disks(&self) -> &DiskSet {
        &self.disks
    }
}

#[derive(Debug, Clone)]
pub enum TickOutcome {
    KeepDriving,
    Replanned {
        cause: ReplanCause,
        s_plan: f64,
        /// Collision or divergence distance behind a collision or
        /// divergence replan.
        s_trigger: Option<f64>,
        stats: SearchStats,
    },
    GoalReached,
    Failed {
        reason: String,
        stats: Option<SearchStats>,
    },
}

/// Distance ahead of `from_s` to the first colliding sample, if any.
pub fn check_path_collision(
    path: &PlannedPath,
    from_s: f64,
    belief: &OccupancyGrid,
    disks: &DiskSet,
) -> Option<f64> {
    let field = distance_transform(belief, UnknownAs::Free);
    check_path_collision_in(path, path.cursor_at(from_s), &field, disks)
}

/// [`check_path_collision`] on a precomputed field, starting at a cursor.
pub fn check_path_collision_in(
    path: &PlannedPath,
    from: PathCursor,
    field: &DistanceField,
    disks: &DiskSet,
) -> Option<f64> {
    if pose_collides(&path.pose_at(from), disks, field) {
        return Some(0.0);
    }
    let mut s_before = 0.0;
    for (i, seg) in path.segments.iter().enumerate().skip(from.segment) {
        match seg {
            Segment::Rotation(r) => {
                let pose = Pose2D::new(r.x, r.y, r.from_yaw);
                if rotation_collides(&pose, r.delta, disks, field) {
                    return Some(s_before);
                }
            }
            Segment::Drive(d) => {
                let offset = if i == from.segment { from.offset } else { 0.0 };
                for (sample, &s) in d.samples.iter().zip(&d.s) {
                    if s <= offset {
                        continue;
                    }
                    if pose_collides(&sample.pose, disks, field) {
                        return Some(s_before + s - offset);
                    }
                }
                s_before += d.length() - offset;
            }
        }
    }
    None
}

/// Picks the replanning start on the current path; returns its pose and `s_plan`.
pub fn compute_replan_start(
    state: &MissionState,
    s_coll_found: Option<f64>,
    s_div_found: Option<f64>,
    alpha: f64,
) -> Result<(Pose2D, f64), MissionError> {
    let path = state.current_path.as_ref().ok_or(MissionError::NothingToReplan)?;
    let progress = path.drive_s(state.cursor);
    let remaining = (path.total_drive_length() - progress).max(0.0);
    let nearest = remaining
        .min(s_coll_found.unwrap_or(f64::INFINITY))
        .min(s_div_found.unwrap_or(f64::INFINITY));
    let s_plan = alpha * nearest;
    let cursor = if s_plan > 0.0 {
        path.cursor_at(progress + s_plan)
    } else {
        state.cursor
    };
    Ok((path.pose_at(cursor), s_plan))
}

/// One decision step of the replanning policy.
pub fn mission_tick(state: &mut MissionState, belief: &OccupancyGrid, mission: &Mission) -> TickOutcome {
    let pose = state.vehicle_pose();
    if mission.planner.within_goal_tolerance(&pose, &mission.goal) {
        return TickOutcome::GoalReached;
    }
    let cfg = &mission.config;

    // 2D guidance on the current belief
    let mut s_div_found = None;
    let mut dmap = None;
    if mission.guided {
        let map = match build_distance_map_inflated(
            belief,
            &mission.goal,
            mission.planner.xy_resolution,
            mission.planner.inflation,
        ) {
            Ok(m) => m,
            Err(e) => return failed(e.to_string(), None),
        };
        let astar = match extract_astar_path(&map, &pose) {
            Ok(p) => p,
            Err(e) => return failed(e.to_string(), None),
        };
        if let Some(prev) = &state.prev_astar {
            s_div_found = detect_divergence(prev, &astar, cfg.d_div);
        }
        state.prev_astar = Some(astar);
        state.s_g = map.h_at(pose.x, pose.y);
        dmap = Some(map);
    }

    let field = distance_transform(belief, UnknownAs::Free);
    let s_coll_found = state
        .current_path
        .as_ref()
        .and_then(|p| check_path_collision_in(p, state.cursor, &field, &mission.disks));

    let cause = match &state.current_path {
        None => Some(ReplanCause::Initial),
        Some(path) => {
            let progress = path.drive_s(state.cursor);
            if s_coll_found.is_some_and(|s| s <= cfg.s_coll) {
                Some(ReplanCause::Collision)
            } else if !mission.guided {
                // a goal-directed path that ends short of the goal
                path.at_end(state.cursor).then_some(ReplanCause::Refresh)
            } else if s_div_found.is_some() {
                Some(ReplanCause::Divergence)
            } else if !state.targets_goal && state.s_g < cfg.s_lim {
                Some(ReplanCause::GoalMode)
            } else if path.at_end(state.cursor)
                || (!state.targets_goal && progress - state.last_replan_progress >= cfg.s_t)
            {
                Some(ReplanCause::Refresh)
            } else {
                None
            }
        }
    };
    let Some(cause) = cause else {
        return TickOutcome::KeepDriving;
    };

    let (start, s_plan) = match &state.current_path {
        None => (pose, 0.0),
        Some(path) => {
            let div = if cause == ReplanCause::Divergence { s_div_found } else { None };
            let s_plan = match compute_replan_start(state, s_coll_found, div, cfg.alpha) {
                Ok((_, s)) => s,
                Err(e) => return failed(e.to_string(), None),
            };
            // start on a checked sample, not between two
            let progress = path.drive_s(state.cursor);
            let mut cursor = path.snap_back(path.cursor_at(progress + s_plan));
            if (cursor.segment, cursor.offset) < (state.cursor.segment, state.cursor.offset) {
                cursor = state.cursor;
            }
            (path.pose_at(cursor), path.drive_s(cursor) - progress)
        }
    };

    // stop rule and planning goal
    let mut goal = mission.goal;
    let mut stop = StopRule::Goal;
    if mission.guided && cfg.nav_mode != NavMode::None {
        let map = dmap.as_ref().expect("guided ticks build a distance map");
        let s_g_start = map.h_at(start.x, start.y);
        if cause != ReplanCause::GoalMode && s_g_start >= cfg.s_lim {
            match cfg.nav_mode {
                NavMode::EarlyStop => stop = StopRule::EarlyStop { s_w: cfg.s_w },
                NavMode::Waypoint => {
                    let waypose = extract_astar_path(map, &start).and_then(|p| waypose_at(&p, cfg.s_w));
                    match waypose {
                        Ok(w) => goal = w,
                        Err(e) => return failed(e.to_string(), None),
                    }
                }
                NavMode::None => {}
            }
        }
    }

    let goal_map;
    let map = match &dmap {
        Some(m) if goal == mission.goal => m,
        _ => {
            goal_map = build_distance_map_inflated(
                belief,
                &goal,
                mission.planner.xy_resolution,
                mission.planner.inflation,
            );
            match &goal_map {
                Ok(m) => m,
                Err(e) => return failed(e.to_string(), None),
            }
        }
    };
    let out = plan_with(
        &field,
        map,
        &start,
        &goal,
        &mission.planner,
        &mission.vehicle,
        mission.mode,
        stop,
    );
    let planned = match out.result {
        Ok(p) => p,
        Err(e) => return failed(e.to_string(), Some(out.stats)),
    };

    let mut new_path = match &state.current_path {
        Some(path) if s_plan > 0.0 => {
            let progress = path.drive_s(state.cursor);
            path.slice(state.cursor, path.cursor_at(progress + s_plan))
        }
        _ => PlannedPath::new(start),
    };
    new_path.append(&planned);
    state.current_path = Some(new_path);
    state.cursor = PathCursor::START;
    state.last_replan_progress = 0.0;
    state.targets_goal = goal == mission.goal && stop == StopRule::Goal;
    let s_trigger = match cause {
        ReplanCause::Collision => s_coll_found,
        ReplanCause::Divergence => s_div_found,
        _ => None,
    };
    TickOutcome::Replanned {
        cause,
        s_plan,
        s_trigger,
        stats: out.stats,
    }
}

fn failed(reason: String, stats: Option<SearchStats>) -> TickOutcome {
    TickOutcome::Failed { reason, stats }
}
