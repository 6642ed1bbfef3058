//! Vehicle kinematics, footprint cover and collision checks.
//!
//! Poses refer to the rear-axle center, so an in-place rotation of the second
//! system model only changes the heading.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geometry::{integrate_arc, Pose2D};
use crate::grid::DistanceField;

/// Maximum steering angle of the U-Shift driveboard, 31.51°.
pub const USHIFT_MAX_STEER_DEG: f64 = 31.51;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSpec {
    pub length: f64,
    pub width: f64,
    pub wheelbase: f64,
    /// Rear bumper to rear axle.
    pub rear_overhang: f64,
    /// Radians.
    pub max_steer: f64,
    pub n_disks: usize,
    /// Seconds needed to switch into and out of the rotation model.
    pub model_switch_time: f64,
}

impl Default for VehicleSpec {
    fn default() -> Self {
        Self::ushift()
    }
}

impl VehicleSpec {
    /// U-Shift driveboard, 4 m × 2 m. Wheelbase and overhang are assumed values.
    pub fn ushift() -> Self {
        VehicleSpec {
            length: 4.0,
            width: 2.0,
            wheelbase: 2.5,
            rear_overhang: 1.5,
            max_steer: USHIFT_MAX_STEER_DEG.to_radians(),
            n_disks: 3,
            model_switch_time: 5.0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::new(name, format!("must be positive, got {v}")))
            }
        };
        positive(self.length, "vehicle.length")?;
        positive(self.width, "vehicle.width")?;
        positive(self.wheelbase, "vehicle.wheelbase")?;
        if self.wheelbase > self.length {
            return Err(ConfigError::new("vehicle.wheelbase", "must not exceed length"));
        }
        if !(0.0..self.length).contains(&self.rear_overhang) {
            return Err(ConfigError::new(
                "vehicle.rear_overhang",
                "must lie in [0, length)",
            ));
        }
        if !(self.max_steer > 0.0 && self.max_steer < std::f64::consts::FRAC_PI_2) {
            return Err(ConfigError::new("vehicle.max_steer", "must lie in (0, π/2)"));
        }
        if self.n_disks == 0 {
            return Err(ConfigError::new("vehicle.n_disks", "must be at least 1"));
        }
        if !(self.model_switch_time >= 0.0 && self.model_switch_time.is_finite()) {
            return Err(ConfigError::new(
                "vehicle.model_switch_time",
                "must be non-negative",
            ));
        }
        Ok(())
    }

    /// Minimum turning radius of the rear-axle center.
    pub fn min_turn_radius(&self) -> f64 {
        self.wheelbase / self.max_steer.tan()
    }

    pub fn max_curvature(&self) -> f64 {
        self.max_steer.tan() / self.wheelbase
    }

    /// Footprint corners (rear-right, rear-left, front-left, front-right) at `pose`.
    pub fn corners(&self, pose: &Pose2D) -> [(f64, f64); 4] {
        let rear = -self.rear_overhang;
        let front = self.length - self.rear_overhang;
        let half = self.width / 2.0;
        [
            pose.transform_point(rear, -half),
            pose.transform_point(rear, half),
            pose.transform_point(front, half),
            pose.transform_point(front, -half),
        ]
    }

    /// Whether a world point lies inside the footprint rectangle at `pose`.
    pub fn footprint_contains(&self, pose: &Pose2D, x: f64, y: f64) -> bool {
        let local = pose.relative(&Pose2D::new(x, y, 0.0));
        local.x >= -self.rear_overhang
            && local.x <= self.length - self.rear_overhang
            && local.y.abs() <= self.width / 2.0
    }
}

/// Kinematic bicycle step along an exact circular arc. Negative `arc_len` reverses.
pub fn bicycle_step(pose: &Pose2D, steer: f64, arc_len: f64, wheelbase: f64) -> Pose2D {
    integrate_arc(pose, steer.tan() / wheelbase, arc_len)
}

/// Rotation about the rear-axle center.
pub fn rotate_in_place(pose: &Pose2D, delta_yaw: f64) -> Pose2D {
    Pose2D::new(pose.x, pose.y, pose.yaw + delta_yaw)
}

/// Disks along the longitudinal axis whose union covers the footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskSet {
    /// Longitudinal offsets from the rear-axle center.
    pub centers: Vec<f64>,
    pub radius: f64,
    /// Farthest footprint corner from the rear axle.
    pub corner_radius: f64,
}

pub fn make_disk_set(spec: &VehicleSpec) -> DiskSet {
    assert!(spec.n_disks >= 1, "at least one disk");
    let n = spec.n_disks as f64;
    let d = spec.length / (2.0 * n);
    let centers = (0..spec.n_disks)
        .map(|i| -spec.rear_overhang + d * (2 * i + 1) as f64)
        .collect();
    let half = spec.width / 2.0;
    let reach = spec.rear_overhang.max(spec.length - spec.rear_overhang);
    DiskSet {
        centers,
        radius: d.hypot(half),
        corner_radius: reach.hypot(half),
    }
}

impl DiskSet {
    /// World positions of the disk centers at `pose`.
    pub fn placed(&self, pose: &Pose2D) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (s, c) = pose.yaw.sin_cos();
        let (x, y) = (pose.x, pose.y);
        self.centers.iter().map(move |&o| (x + c * o, y + s * o))
    }

    pub fn covers(&self, pose: &Pose2D, x: f64, y: f64) -> bool {
        self.placed(pose)
            .any(|(cx, cy)| (x - cx).hypot(y - cy) <= self.radius + 1e-12)
    }

    /// Radius of the circle around the rear axle swept by any rotation.
    pub fn swept_radius(&self) -> f64 {
        self.centers
            .iter()
            .map(|o| o.abs() + self.radius)
            .fold(0.0, f64::max)
    }
}

// Field values are distances between cell centers. An obstacle point inside a
// cell and the query point inside another each sit up to half a cell diagonal
// from their centers, hence the full diagonal as slack.
fn cell_slack(field: &DistanceField) -> f64 {
    field.resolution() * std::f64::consts::SQRT_2
}

/// True when any disk at `pose` comes closer to an obstacle than its radius.
/// Disk centers outside the field collide.
pub fn pose_collides(pose: &Pose2D, disks: &DiskSet, field: &DistanceField) -> bool {
    let limit = disks.radius + cell_slack(field);
    disks
        .placed(pose)
        .any(|(x, y)| field.at_world(x, y).is_none_or(|d| d < limit))
}

/// Conservative check for a rotation about the rear axle: the whole circle
/// swept by the disks must be obstacle free, independent of the angle.
pub fn rotation_collides(pose: &Pose2D, _delta_yaw: f64, disks: &DiskSet, field: &DistanceField) -> bool {
    let slack = cell_slack(field);
    let limit = (disks.swept_radius() + slack / 2.0).max(disks.corner_radius + slack);
    field.at_world(pose.x, pose.y).is_none_or(|d| d < limit) || pose_collides(pose, disks, field)
}
