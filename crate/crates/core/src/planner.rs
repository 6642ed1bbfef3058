//! Hybrid A* search with optional rear-axle rotation primitives.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, PlanError};
use crate::geometry::{angle_diff, rs_length, rs_shortest_path, wrap_angle, Direction, Pose2D};
use crate::grid::{distance_transform, DistanceField, OccupancyGrid, UnknownAs};
use crate::heuristic::{build_distance_map_inflated, DistanceMap};
use crate::path::PlannedPath;
use crate::vehicle::{bicycle_step, make_disk_set, pose_collides, rotate_in_place, rotation_collides, DiskSet, VehicleSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Position cell size of the search, meters.
    pub xy_resolution: f64,
    /// Heading bin size, radians.
    pub yaw_resolution: f64,
    /// Length of one drive primitive, meters.
    pub arc_length: f64,
    /// Steering angles spread evenly over `[-max_steer, max_steer]`; odd.
    pub n_steer: usize,
    pub w_rev: f64,
    pub w_switch: f64,
    pub w_steer: f64,
    pub w_dsteer: f64,
    /// Cost of the system-model change around a rotation (5 s at 1 m/s).
    pub w_rot_fixed: f64,
    /// Cost per radian rotated.
    pub w_rot_rate: f64,
    /// Rotation angle step, radians.
    pub rotation_step: f64,
    /// Largest rotation multiple `n` in `n·rotation_step`.
    pub max_rotation_steps: u32,
    /// Rotation children are spawned on every `f_ext`-th expansion.
    pub f_ext: u32,
    /// Analytic expansions run on every pop with `h` below this, meters.
    pub analytic_radius: f64,
    /// ...and otherwise on every `analytic_every`-th pop.
    pub analytic_every: u32,
    /// Full length of the heading lines of the geometric extension, meters.
    pub extension_segment_length: f64,
    pub node_budget: usize,
    /// Obstacle inflation of the 2D heuristic, meters.
    pub inflation: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            xy_resolution: 0.625,
            yaw_resolution: 10f64.to_radians(),
            arc_length: 1.25,
            n_steer: 5,
            w_rev: 0.5,
            w_switch: 2.0,
            w_steer: 0.5,
            w_dsteer: 1.0,
            w_rot_fixed: 5.0,
            w_rot_rate: 2.0 / PI,
            rotation_step: 90f64.to_radians(),
            max_rotation_steps: 2,
            f_ext: 5,
            analytic_radius: 30.0,
            analytic_every: 10,
            extension_segment_length: 60.0,
            node_budget: 500_000,
            inflation: 1.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::new(name, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |v: f64, name: &str| {
            if v >= 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(ConfigError::new(name, format!("must be non-negative, got {v}")))
            }
        };
        positive(self.xy_resolution, "planner.xy_resolution")?;
        positive(self.yaw_resolution, "planner.yaw_resolution")?;
        if self.yaw_resolution > PI {
            return Err(ConfigError::new("planner.yaw_resolution", "must not exceed π"));
        }
        positive(self.arc_length, "planner.arc_length")?;
        if self.n_steer == 0 || self.n_steer % 2 == 0 {
            return Err(ConfigError::new("planner.n_steer", "must be odd"));
        }
        non_negative(self.w_rev, "planner.w_rev")?;
        non_negative(self.w_switch, "planner.w_switch")?;
        non_negative(self.w_steer, "planner.w_steer")?;
        non_negative(self.w_dsteer, "planner.w_dsteer")?;
        non_negative(self.w_rot_fixed, "planner.w_rot_fixed")?;
        non_negative(self.w_rot_rate, "planner.w_rot_rate")?;
        positive(self.rotation_step, "planner.rotation_step")?;
        if self.max_rotation_steps == 0 {
            return Err(ConfigError::new("planner.max_rotation_steps", "must be at least 1"));
        }
        if self.f_ext == 0 {
            return Err(ConfigError::new("planner.f_ext", "must be at least 1"));
        }
        non_negative(self.analytic_radius, "planner.analytic_radius")?;
        if self.analytic_every == 0 {
            return Err(ConfigError::new("planner.analytic_every", "must be at least 1"));
        }
        positive(self.extension_segment_length, "planner.extension_segment_length")?;
        if self.node_budget == 0 {
            return Err(ConfigError::new("planner.node_budget", "must be at least 1"));
        }
        non_negative(self.inflation, "planner.inflation")?;
        Ok(())
    }

    pub fn yaw_bins(&self) -> usize {
        (2.0 * PI / self.yaw_resolution - 1e-9).ceil() as usize
    }

    /// Goal tolerance shared by the search and the mission.
    pub fn within_goal_tolerance(&self, pose: &Pose2D, goal: &Pose2D) -> bool {
        pose.distance_to(goal) <= self.xy_resolution + 1e-9
            && angle_diff(pose.yaw, goal.yaw).abs() <= self.yaw_resolution + 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerMode {
    Standard,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    Goal,
    /// Stop once the 2D cost-to-goal has dropped by more than `s_w`.
    EarlyStop { s_w: f64 },
}

/// One expansion edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Drive {
        arc_length: f64,
        steer: f64,
        direction: Direction,
    },
    Rotation {
        delta_yaw: f64,
    },
}

/// Cost of `motion` following `parent` (`None` at the start node).
pub fn cost_of(motion: &Motion, parent: Option<&Motion>, cfg: &PlannerConfig) -> f64 {
    match *motion {
        Motion::Drive {
            arc_length,
            steer,
            direction,
        } => {
            let (switched, parent_steer) = match parent {
                Some(Motion::Drive {
                    steer: s,
                    direction: d,
                    ..
                }) => (*d != direction, *s),
                _ => (false, 0.0),
            };
            let reverse = if direction == Direction::Reverse { cfg.w_rev } else { 0.0 };
            arc_length * (1.0 + reverse)
                + if switched { cfg.w_switch } else { 0.0 }
                + cfg.w_steer * steer.abs()
                + cfg.w_dsteer * (steer - parent_steer).abs()
        }
        Motion::Rotation { delta_yaw } => cfg.w_rot_fixed + cfg.w_rot_rate * delta_yaw.abs(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveSet {
    pub arc_length: f64,
    pub steer_angles: Vec<f64>,
    pub directions: Vec<Direction>,
    /// Empty unless extended; each in `(-π, π]`.
    pub rotation_angles: Vec<f64>,
    pub f_ext: u32,
}

impl PrimitiveSet {
    pub fn new(cfg: &PlannerConfig, vehicle: &VehicleSpec, mode: PlannerMode) -> Self {
        let half = (cfg.n_steer / 2) as f64;
        let steer_angles = (0..cfg.n_steer)
            .map(|i| {
                if half == 0.0 {
                    0.0
                } else {
                    vehicle.max_steer * (i as f64 - half) / half
                }
            })
            .collect();
        let mut rotation_angles: Vec<f64> = Vec::new();
        if mode == PlannerMode::Extended {
            for n in 1..=cfg.max_rotation_steps {
                for sign in [1.0, -1.0] {
                    let mut a = wrap_angle(sign * n as f64 * cfg.rotation_step);
                    if a <= -PI + 1e-12 {
                        a = PI;
                    }
                    if a.abs() > 1e-9 && !rotation_angles.iter().any(|b| (a - b).abs() < 1e-9) {
                        rotation_angles.push(a);
                    }
                }
            }
        }
        PrimitiveSet {
            arc_length: cfg.arc_length,
            steer_angles,
            directions: vec![Direction::Forward, Direction::Reverse],
            rotation_angles,
            f_ext: cfg.f_ext,
        }
    }
}

/// Drive, rotate, drive connection through the intersection of the heading lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricExtension {
    pub rotation_point: (f64, f64),
    pub pre_dist: f64,
    pub delta_yaw: f64,
    pub post_dist: f64,
}

pub fn geometric_extension(current: &Pose2D, goal: &Pose2D, seg_len: f64) -> Option<GeometricExtension> {
    assert!(seg_len > 0.0, "segment length must be positive");
    let u = (current.yaw.cos(), current.yaw.sin());
    let v = (goal.yaw.cos(), goal.yaw.sin());
    let cross = u.0 * v.1 - u.1 * v.0;
    if cross.abs() < 1e-9 {
        return None;
    }
    let d = (goal.x - current.x, goal.y - current.y);
    let t = (d.0 * v.1 - d.1 * v.0) / cross;
    let s = (d.0 * u.1 - d.1 * u.0) / cross;
    let half = seg_len / 2.0;
    if t.abs() > half || s.abs() > half {
        return None;
    }
    Some(GeometricExtension {
        rotation_point: (current.x + t * u.0, current.y + t * u.1),
        pre_dist: t,
        delta_yaw: wrap_angle(goal.yaw - current.yaw),
        post_dist: -s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Goal,
    ReedsShepp,
    GeometricExtension,
    EarlyStop,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_expanded: usize,
    pub nodes_created: usize,
    pub seconds: f64,
    pub termination: Option<Termination>,
}

#[derive(Debug, Clone)]
pub struct PlanOutput {
    pub result: Result<PlannedPath, PlanError>,
    pub stats: SearchStats,
}

#[derive(Debug, Clone)]
struct SearchNode {
    pose: Pose2D,
    key: usize,
    g: f64,
    parent: Option<usize>,
    motion: Option<Motion>,
}

#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    f: f64,
    h: f64,
    seq: usize,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    // reversed: the heap pops the lowest f, then lowest h, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Analytic goal connection appended after a search node.
#[derive(Debug, Clone, Copy)]
enum Piece {
    Arc { curvature: f64, length: f64, steer: f64 },
    Rotate { delta: f64 },
}

struct Search<'a> {
    cfg: &'a PlannerConfig,
    vehicle: &'a VehicleSpec,
    prims: PrimitiveSet,
    disks: DiskSet,
    field: &'a DistanceField,
    dmap: &'a DistanceMap,
    goal: Pose2D,
    check_step: f64,
    turn_radius: f64,
    key_dims: (usize, usize, usize),
    origin: (f64, f64),
}

impl Search<'_> {
    fn key_of(&self, pose: &Pose2D) -> Option<usize> {
        let (w, h, n) = self.key_dims;
        let ix = ((pose.x - self.origin.0) / self.cfg.xy_resolution).floor();
        let iy = ((pose.y - self.origin.1) / self.cfg.xy_resolution).floor();
        if ix < 0.0 || iy < 0.0 || ix >= w as f64 || iy >= h as f64 {
            return None;
        }
        let iyaw = (pose.yaw / self.cfg.yaw_resolution).round().rem_euclid(n as f64) as usize % n;
        Some((iyaw * h + iy as usize) * w + ix as usize)
    }

    fn h_d(&self, pose: &Pose2D) -> f64 {
        self.dmap.h_at(pose.x, pose.y)
    }

    fn heuristic(&self, pose: &Pose2D) -> f64 {
        let h_d = self.h_d(pose);
        if h_d.is_infinite() {
            return h_d;
        }
        h_d.max(rs_length(pose, &self.goal, self.turn_radius))
    }

    /// Endpoint of a drive primitive, `None` if any sub-step collides.
    fn drive(&self, from: &Pose2D, steer: f64, signed: f64) -> Option<Pose2D> {
        let n = (signed.abs() / self.check_step).ceil().max(1.0) as usize;
        let mut pose = *from;
        for i in 1..=n {
            pose = bicycle_step(from, steer, signed * i as f64 / n as f64, self.vehicle.wheelbase);
            if pose_collides(&pose, &self.disks, self.field) {
                return None;
            }
        }
        Some(pose)
    }

    fn arc_free(&self, from: &Pose2D, curvature: f64, signed: f64) -> Option<Pose2D> {
        let mut probe = PlannedPath::new(*from);
        probe.push_arc(curvature, signed, self.check_step);
        let collides = probe
            .poses()
            .iter()
            .skip(1)
            .any(|p| pose_collides(p, &self.disks, self.field));
        (!collides).then(|| probe.end_pose())
    }

    fn price(&self, pieces: &[Piece], mut parent: Option<Motion>) -> f64 {
        let mut total = 0.0;
        for piece in pieces {
            let motion = match *piece {
                Piece::Arc { length, steer, .. } => Motion::Drive {
                    arc_length: length.abs(),
                    steer,
                    direction: Direction::from_signed(length),
                },
                Piece::Rotate { delta } => Motion::Rotation { delta_yaw: delta },
            };
            total += cost_of(&motion, parent.as_ref(), self.cfg);
            parent = Some(motion);
        }
        total
    }

    fn reeds_shepp_suffix(&self, from: &Pose2D) -> Option<Vec<Piece>> {
        let rs = rs_shortest_path(from, &self.goal, self.turn_radius);
        let mut pose = *from;
        let mut pieces = Vec::new();
        for seg in &rs.segments {
            let curvature = seg.kind.curvature(self.turn_radius);
            let signed = seg.direction.sign() * seg.length;
            pose = self.arc_free(&pose, curvature, signed)?;
            pieces.push(Piece::Arc {
                curvature,
                length: signed,
                steer: (curvature * self.vehicle.wheelbase).atan(),
            });
        }
        Some(pieces)
    }

    fn extension_suffix(&self, from: &Pose2D) -> Option<Vec<Piece>> {
        let ext = geometric_extension(from, &self.goal, self.cfg.extension_segment_length)?;
        let pivot = if ext.pre_dist.abs() > 1e-12 {
            self.arc_free(from, 0.0, ext.pre_dist)?
        } else {
            *from
        };
        if rotation_collides(&pivot, ext.delta_yaw, &self.disks, self.field) {
            return None;
        }
        let turned = rotate_in_place(&pivot, ext.delta_yaw);
        if ext.post_dist.abs() > 1e-12 {
            self.arc_free(&turned, 0.0, ext.post_dist)?;
        }
        Some(vec![
            Piece::Arc {
                curvature: 0.0,
                length: ext.pre_dist,
                steer: 0.0,
            },
            Piece::Rotate { delta: ext.delta_yaw },
            Piece::Arc {
                curvature: 0.0,
                length: ext.post_dist,
                steer: 0.0,
            },
        ])
    }

    fn analytic(&self, node: &SearchNode, mode: PlannerMode) -> Option<(Vec<Piece>, Termination)> {
        let mut best: Option<(f64, Vec<Piece>, Termination)> = None;
        let mut consider = |pieces: Vec<Piece>, kind: Termination| {
            let cost = self.price(&pieces, node.motion);
            if cost.is_finite() && best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
                best = Some((cost, pieces, kind));
            }
        };
        if let Some(p) = self.reeds_shepp_suffix(&node.pose) {
            consider(p, Termination::ReedsShepp);
        }
        if mode == PlannerMode::Extended {
            if let Some(p) = self.extension_suffix(&node.pose) {
                consider(p, Termination::GeometricExtension);
            }
        }
        best.map(|(_, p, k)| (p, k))
    }

    fn reconstruct(&self, nodes: &[SearchNode], last: usize, suffix: &[Piece]) -> PlannedPath {
        let mut chain = vec![last];
        while let Some(p) = nodes[*chain.last().unwrap()].parent {
            chain.push(p);
            assert!(chain.len() <= nodes.len(), "cyclic parent chain");
        }
        chain.reverse();
        let mut path = PlannedPath::new(nodes[chain[0]].pose);
        for &i in &chain[1..] {
            match nodes[i].motion.expect("non-root nodes carry a motion") {
                Motion::Drive {
                    arc_length,
                    steer,
                    direction,
                } => path.push_arc(
                    steer.tan() / self.vehicle.wheelbase,
                    direction.sign() * arc_length,
                    self.check_step,
                ),
                Motion::Rotation { delta_yaw } => path.push_rotation(delta_yaw),
            }
        }
        for piece in suffix {
            match *piece {
                Piece::Arc { curvature, length, .. } => path.push_arc(curvature, length, self.check_step),
                Piece::Rotate { delta } => {
                    if delta.abs() > 1e-12 {
                        path.push_rotation(delta)
                    }
                }
            }
        }
        path
    }
}

/// Runs one Hybrid A* search on `belief` (unknown cells count as free).
pub fn plan(
    belief: &OccupancyGrid,
    start: &Pose2D,
    goal: &Pose2D,
    cfg: &PlannerConfig,
    vehicle: &VehicleSpec,
    mode: PlannerMode,
    stop: StopRule,
) -> PlanOutput {
    let field = distance_transform(belief, UnknownAs::Free);
    match build_distance_map_inflated(belief, goal, cfg.xy_resolution, cfg.inflation) {
        Ok(dmap) => plan_with(&field, &dmap, start, goal, cfg, vehicle, mode, stop),
        Err(e) => PlanOutput {
            result: Err(e.into()),
            stats: SearchStats::default(),
        },
    }
}

/// [`plan`] on a prebuilt obstacle distance field and 2D heuristic map for
/// `goal`. The reported time covers the search only.
#[allow(clippy::too_many_arguments)]
pub fn plan_with(
    field: &DistanceField,
    dmap: &DistanceMap,
    start: &Pose2D,
    goal: &Pose2D,
    cfg: &PlannerConfig,
    vehicle: &VehicleSpec,
    mode: PlannerMode,
    stop: StopRule,
) -> PlanOutput {
    let t0 = Instant::now();
    let mut stats = SearchStats::default();
    let result = search(field, dmap, start, goal, cfg, vehicle, mode, stop, &mut stats);
    stats.seconds = t0.elapsed().as_secs_f64();
    PlanOutput { result, stats }
}

#[allow(clippy::too_many_arguments)]
fn search(
    field: &DistanceField,
    dmap: &DistanceMap,
    start: &Pose2D,
    goal: &Pose2D,
    cfg: &PlannerConfig,
    vehicle: &VehicleSpec,
    mode: PlannerMode,
    stop: StopRule,
    stats: &mut SearchStats,
) -> Result<PlannedPath, PlanError> {
    debug_assert_eq!(dmap.resolution(), cfg.xy_resolution);
    let disks = make_disk_set(vehicle);
    if pose_collides(start, &disks, field) {
        return Err(PlanError::StartInCollision);
    }
    if stop == StopRule::Goal && pose_collides(goal, &disks, field) {
        return Err(PlanError::GoalInCollision);
    }
    let key_dims = (dmap.width(), dmap.height(), cfg.yaw_bins());
    let s = Search {
        cfg,
        vehicle,
        prims: PrimitiveSet::new(cfg, vehicle, mode),
        disks,
        field,
        dmap,
        goal: *goal,
        check_step: field.resolution(),
        turn_radius: vehicle.min_turn_radius(),
        key_dims,
        origin: dmap.origin(),
    };

    let h_start_d = s.h_d(start);
    if h_start_d.is_infinite() {
        return Err(PlanError::Heuristic(crate::error::HeuristicError::NoRoute));
    }
    let n_keys = key_dims.0 * key_dims.1 * key_dims.2;
    let mut best_g = vec![f64::INFINITY; n_keys];
    let mut closed = vec![false; n_keys];
    let mut nodes: Vec<SearchNode> = Vec::new();
    let mut open = BinaryHeap::new();
    let mut seq = 0usize;

    let start_key = s.key_of(start).ok_or(PlanError::StartInCollision)?;
    let h0 = s.heuristic(start);
    nodes.push(SearchNode {
        pose: *start,
        key: start_key,
        g: 0.0,
        parent: None,
        motion: None,
    });
    best_g[start_key] = 0.0;
    open.push(OpenEntry {
        f: h0,
        h: h0,
        seq,
        node: 0,
    });
    stats.nodes_created = 1;

    while let Some(entry) = open.pop() {
        let node = nodes[entry.node].clone();
        if closed[node.key] || node.g > best_g[node.key] {
            continue;
        }
        closed[node.key] = true;

        if cfg.within_goal_tolerance(&node.pose, goal) {
            stats.termination = Some(Termination::Goal);
            return Ok(s.reconstruct(&nodes, entry.node, &[]));
        }
        match stop {
            StopRule::EarlyStop { s_w } => {
                if h_start_d - s.h_d(&node.pose) > s_w {
                    stats.termination = Some(Termination::EarlyStop);
                    return Ok(s.reconstruct(&nodes, entry.node, &[]));
                }
            }
            StopRule::Goal => {
                let index = stats.nodes_expanded as u32;
                if entry.h < cfg.analytic_radius || index % cfg.analytic_every == 0 {
                    if let Some((suffix, kind)) = s.analytic(&node, mode) {
                        stats.termination = Some(kind);
                        return Ok(s.reconstruct(&nodes, entry.node, &suffix));
                    }
                }
            }
        }

        if stats.nodes_expanded >= cfg.node_budget {
            return Err(PlanError::BudgetExceeded);
        }
        let index = stats.nodes_expanded as u32;
        stats.nodes_expanded += 1;

        let mut children: Vec<(Pose2D, Motion)> = Vec::new();
        for &direction in &s.prims.directions {
            for &steer in &s.prims.steer_angles {
                if let Some(p) = s.drive(&node.pose, steer, direction.sign() * s.prims.arc_length) {
                    let motion = Motion::Drive {
                        arc_length: s.prims.arc_length,
                        steer,
                        direction,
                    };
                    children.push((p, motion));
                }
            }
        }
        if !s.prims.rotation_angles.is_empty() && index % s.prims.f_ext == 0 {
            for &delta in &s.prims.rotation_angles {
                if !rotation_collides(&node.pose, delta, &s.disks, s.field) {
                    children.push((rotate_in_place(&node.pose, delta), Motion::Rotation { delta_yaw: delta }));
                }
            }
        }

        for (pose, motion) in children {
            let Some(key) = s.key_of(&pose) else { continue };
            if closed[key] {
                continue;
            }
            let g = node.g + cost_of(&motion, node.motion.as_ref(), cfg);
            if !g.is_finite() || g >= best_g[key] {
                continue;
            }
            let h = s.heuristic(&pose);
            if h.is_infinite() {
                continue;
            }
            best_g[key] = g;
            nodes.push(SearchNode {
                pose,
                key,
                g,
                parent: Some(entry.node),
                motion: Some(motion),
            });
            seq += 1;
            open.push(OpenEntry {
                f: g + h,
                h,
                seq,
                node: nodes.len() - 1,
            });
            stats.nodes_created += 1;
        }
    }
    Err(PlanError::NoPath)
}
