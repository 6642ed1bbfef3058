//! Closed-loop exploration simulator and path metrics.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, GridError, MetricsError};
use crate::geometry::Pose2D;
use crate::grid::{
    distance_transform, raytrace_reveal, voronoi_field, OccupancyGrid, UnknownAs, VoronoiField, DEFAULT_ALPHA,
    DEFAULT_D_MAX,
};
use crate::mission::{mission_tick, Mission, MissionConfig, MissionState, ReplanCause, TickOutcome};
use crate::path::PlannedPath;
use crate::planner::{PlannerConfig, PlannerMode, SearchStats};
use crate::vehicle::{make_disk_set, pose_collides, VehicleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunMode {
    #[serde(rename = "standard")]
    Standard,
    #[serde(rename = "guided")]
    Guided,
    #[serde(rename = "extended")]
    Extended,
    #[serde(rename = "guided+extended")]
    GuidedExtended,
}

impl RunMode {
    pub fn planner_mode(self) -> PlannerMode {
        match self {
            RunMode::Standard | RunMode::Guided => PlannerMode::Standard,
            RunMode::Extended | RunMode::GuidedExtended => PlannerMode::Extended,
        }
    }

    pub fn guided(self) -> bool {
        matches!(self, RunMode::Guided | RunMode::GuidedExtended)
    }

    pub fn name(self) -> &'static str {
        match self {
            RunMode::Standard => "standard",
            RunMode::Guided => "guided",
            RunMode::Extended => "extended",
            RunMode::GuidedExtended => "guided+extended",
        }
    }
}

/// On-disk scenario: a map file plus mission endpoints and sensing setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Map path, relative to the scenario file.
    pub map: PathBuf,
    pub start: Pose2D,
    pub goal: Pose2D,
    pub known_env: bool,
    #[serde(default = "default_sensor_range")]
    pub sensor_range: f64,
    #[serde(default = "default_n_rays")]
    pub n_rays: usize,
    #[serde(default = "default_drive_step")]
    pub drive_step: f64,
    #[serde(default = "default_max_sim_steps")]
    pub max_sim_steps: usize,
}

fn default_sensor_range() -> f64 {
    30.0
}
fn default_n_rays() -> usize {
    1440
}
fn default_drive_step() -> f64 {
    1.0
}
fn default_max_sim_steps() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub truth_map: OccupancyGrid,
    pub start: Pose2D,
    pub goal: Pose2D,
    pub known_env: bool,
    pub sensor_range: f64,
    pub n_rays: usize,
    pub drive_step: f64,
    pub max_sim_steps: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("scenario {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("map {path}: {source}")]
    Map { path: PathBuf, source: GridError },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl ScenarioSpec {
    pub fn from_file(file: &ScenarioFile, truth_map: OccupancyGrid) -> Self {
        ScenarioSpec {
            truth_map,
            start: file.start,
            goal: file.goal,
            known_env: file.known_env,
            sensor_range: file.sensor_range,
            n_rays: file.n_rays,
            drive_step: file.drive_step,
            max_sim_steps: file.max_sim_steps,
        }
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_owned(),
            source,
        })?;
        let file: ScenarioFile = serde_json::from_str(&text).map_err(|source| ScenarioError::Parse {
            path: path.to_owned(),
            source,
        })?;
        let map_path = path.parent().unwrap_or(Path::new(".")).join(&file.map);
        let map = OccupancyGrid::load(&map_path).map_err(|source| ScenarioError::Map {
            path: map_path.clone(),
            source,
        })?;
        Ok(ScenarioSpec::from_file(&file, map))
    }

    /// Checks the numeric fields and that both endpoints are free on the truth map.
    pub fn validate(&self, vehicle: &VehicleSpec) -> Result<(), ConfigError> {
        if !(self.sensor_range > 0.0 && self.sensor_range.is_finite()) {
            return Err(ConfigError::new("scenario.sensor_range", "must be positive"));
        }
        if self.n_rays == 0 {
            return Err(ConfigError::new("scenario.n_rays", "must be positive"));
        }
        if !(self.drive_step > 0.0 && self.drive_step.is_finite()) {
            return Err(ConfigError::new("scenario.drive_step", "must be positive"));
        }
        let disks = make_disk_set(vehicle);
        let field = distance_transform(&self.truth_map, UnknownAs::Free);
        if pose_collides(&self.start, &disks, &field) {
            return Err(ConfigError::new("scenario.start", "in collision on the map"));
        }
        if pose_collides(&self.goal, &disks, &field) {
            return Err(ConfigError::new("scenario.goal", "in collision on the map"));
        }
        Ok(())
    }
}

/// Metric evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Resample step for the curvature-change metric.
    pub ds: f64,
    pub voronoi_alpha: f64,
    pub voronoi_d_max: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            ds: 0.5,
            voronoi_alpha: DEFAULT_ALPHA,
            voronoi_d_max: DEFAULT_D_MAX,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (v, name) in [
            (self.ds, "metrics.ds"),
            (self.voronoi_alpha, "metrics.voronoi_alpha"),
            (self.voronoi_d_max, "metrics.voronoi_d_max"),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::new(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimSettings {
    pub mission: MissionConfig,
    pub planner: PlannerConfig,
    pub vehicle: VehicleSpec,
    pub metrics: MetricsConfig,
    pub mode: RunMode,
}

impl SimSettings {
    pub fn new(mode: RunMode) -> Self {
        SimSettings {
            mission: MissionConfig::default(),
            planner: PlannerConfig::default(),
            vehicle: VehicleSpec::ushift(),
            metrics: MetricsConfig::default(),
            mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord {
    pub step: usize,
    pub cause: ReplanCause,
    pub s_plan: f64,
    pub nodes: usize,
    pub seconds: f64,
    /// Collision or divergence distance that triggered the replan.
    pub s_trigger: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricsReport {
    pub kappa_dot_rms: f64,
    pub kappa_dot_max_abs: f64,
    pub p_max: f64,
    pub p_avg: f64,
    pub length: f64,
    pub n_planner_calls: usize,
    pub t_max: f64,
    pub t_cum: f64,
    pub t_avg: f64,
    pub cumulative_nodes: usize,
    pub n_direction_switches: usize,
    pub n_rotations: usize,
    pub reached: bool,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub driven: PlannedPath,
    pub report: MetricsReport,
    pub events: Vec<EventRecord>,
    pub belief: OccupancyGrid,
    /// Every path the planner returned, as spliced into the mission.
    pub planned: Vec<PlannedPath>,
    pub failure: Option<String>,
}

/// Runs the drive, sense and tick loop until the goal is reached, the
/// mission fails or the step budget runs out.
pub fn run_scenario(spec: &ScenarioSpec, settings: &SimSettings) -> SimResult {
    let truth = &spec.truth_map;
    let mut belief = if spec.known_env {
        truth.clone()
    } else {
        truth.unknown_like()
    };
    let mission = Mission::new(
        settings.mission.clone(),
        settings.planner.clone(),
        settings.vehicle.clone(),
        settings.mode.planner_mode(),
        settings.mode.guided(),
        spec.goal,
    );
    let mut state = MissionState::new(spec.start);
    let mut driven = PlannedPath::new(spec.start);
    let mut events = Vec::new();
    let mut calls: Vec<SearchStats> = Vec::new();
    let mut planned = Vec::new();
    let mut failure = None;
    let mut reached = false;

    for step in 0..spec.max_sim_steps {
        if !spec.known_env {
            let pose = state.vehicle_pose();
            raytrace_reveal(truth, &mut belief, &pose, spec.sensor_range, spec.n_rays);
        }
        match mission_tick(&mut state, &belief, &mission) {
            TickOutcome::GoalReached => {
                reached = true;
                break;
            }
            TickOutcome::Failed { reason, stats } => {
                calls.extend(stats);
                failure = Some(reason);
                break;
            }
            TickOutcome::Replanned {
                cause,
                s_plan,
                s_trigger,
                stats,
            } => {
                events.push(EventRecord {
                    step,
                    cause,
                    s_plan,
                    nodes: stats.nodes_expanded,
                    seconds: stats.seconds,
                    s_trigger,
                });
                calls.push(stats);
                planned.extend(state.current_path.clone());
            }
            TickOutcome::KeepDriving => {}
        }
        let path = state.current_path.as_ref().expect("a path exists after a tick");
        let next = path.advance(state.cursor, spec.drive_step);
        driven.append(&path.slice(state.cursor, next));
        state.cursor = next;
    }
    if !reached && failure.is_none() {
        reached = settings
            .planner
            .within_goal_tolerance(&driven.end_pose(), &spec.goal);
    }

    let field = voronoi_field(truth, settings.metrics.voronoi_alpha, settings.metrics.voronoi_d_max);
    let (kappa_dot_rms, kappa_dot_max_abs) = kappa_dot_rms(&driven, settings.metrics.ds).unwrap_or((0.0, 0.0));
    let (p_max, p_avg) = proximity_stats(&driven, &field, &settings.vehicle);
    let t_cum: f64 = calls.iter().map(|c| c.seconds).sum();
    let report = MetricsReport {
        kappa_dot_rms,
        kappa_dot_max_abs,
        p_max,
        p_avg,
        length: driven.total_drive_length(),
        n_planner_calls: calls.len(),
        t_max: calls.iter().map(|c| c.seconds).fold(0.0, f64::max),
        t_cum,
        t_avg: if calls.is_empty() { 0.0 } else { t_cum / calls.len() as f64 },
        cumulative_nodes: calls.iter().map(|c| c.nodes_expanded).sum(),
        n_direction_switches: driven.n_direction_switches(),
        n_rotations: driven.n_rotations(),
        reached,
    };
    SimResult {
        driven,
        report,
        events,
        belief,
        planned,
        failure,
    }
}

/// RMS and maximum absolute curvature change over curvature sequences sampled
/// `ds` apart. Each sequence contributes its own consecutive differences.
pub fn kappa_dot_stats<S: AsRef<[f64]>>(sequences: &[S], ds: f64) -> Result<(f64, f64), MetricsError> {
    let mut sum_sq = 0.0;
    let mut max_abs: f64 = 0.0;
    let mut n = 0usize;
    for seq in sequences {
        for w in seq.as_ref().windows(2) {
            let d = (w[1] - w[0]) / ds;
            sum_sq += d * d;
            max_abs = max_abs.max(d.abs());
            n += 1;
        }
    }
    if n == 0 {
        return Err(MetricsError::PathTooShort);
    }
    Ok(((sum_sq / n as f64).sqrt(), max_abs))
}

/// Curvature-change statistics of a path, resampled every `ds` within each
/// drive segment. Rotations contribute nothing.
pub fn kappa_dot_rms(driven: &PlannedPath, ds: f64) -> Result<(f64, f64), MetricsError> {
    let sequences: Vec<Vec<f64>> = driven
        .drives()
        .map(|d| {
            let n = (d.length() / ds + 1e-9).floor() as usize;
            (0..=n).map(|i| d.curvature_at(i as f64 * ds)).collect()
        })
        .collect();
    kappa_dot_stats(&sequences, ds)
}

/// Largest and mean per-sample proximity, where a sample's proximity is the
/// largest field value under its four footprint corners.
pub fn proximity_stats(driven: &PlannedPath, field: &VoronoiField, spec: &VehicleSpec) -> (f64, f64) {
    let mut poses: Vec<Pose2D> = driven
        .drives()
        .flat_map(|d| d.samples.iter().map(|s| s.pose))
        .collect();
    if poses.is_empty() {
        poses.push(driven.start);
    }
    let per_sample = |pose: &Pose2D| {
        spec.corners(pose)
            .iter()
            .map(|&(x, y)| field.at_world(x, y).unwrap_or(1.0))
            .fold(0.0, f64::max)
    };
    let values: Vec<f64> = poses.iter().map(per_sample).collect();
    let p_max = values.iter().copied().fold(0.0, f64::max);
    let p_avg = values.iter().sum::<f64>() / values.len() as f64;
    (p_max, p_avg)
}
