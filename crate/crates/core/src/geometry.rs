//! Planar poses, angle arithmetic and arc integration.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

pub mod reeds_shepp;

pub use reeds_shepp::{rs_length, rs_shortest_path, RsPath, RsSegment, SegmentKind};

const TWO_PI: f64 = 2.0 * PI;

/// Wraps an angle into `[-π, π)`.
///
/// The input is assumed finite; use [`normalize_angle`] for unchecked values.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut r = theta - TWO_PI * ((theta + PI) / TWO_PI).floor();
    if r >= PI {
        r -= TWO_PI;
    }
    if r < -PI {
        r += TWO_PI;
    }
    r
}

/// Wraps an angle into `[-π, π)`, rejecting NaN and infinities.
pub fn normalize_angle(theta: f64) -> Result<f64, GeometryError> {
    if !theta.is_finite() {
        return Err(GeometryError::NonFinite("angle"));
    }
    Ok(wrap_angle(theta))
}

/// Smallest absolute difference between two headings.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Vehicle pose anchored at the rear-axle center. `yaw` always lies in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Pose2D {
            x,
            y,
            yaw: wrap_angle(yaw),
        }
    }

    pub fn try_new(x: f64, y: f64, yaw: f64) -> Result<Self, GeometryError> {
        if !x.is_finite() || !y.is_finite() {
            return Err(GeometryError::NonFinite("position"));
        }
        Ok(Pose2D {
            x,
            y,
            yaw: normalize_angle(yaw)?,
        })
    }

    pub fn origin() -> Self {
        Pose2D::new(0.0, 0.0, 0.0)
    }

    pub fn distance_to(&self, other: &Pose2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Expresses `other` in the frame of `self`.
    pub fn relative(&self, other: &Pose2D) -> Pose2D {
        let (s, c) = self.yaw.sin_cos();
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        Pose2D::new(c * dx + s * dy, -s * dx + c * dy, other.yaw - self.yaw)
    }

    /// Maps a pose given in the frame of `self` to world coordinates.
    pub fn compose(&self, local: &Pose2D) -> Pose2D {
        let (s, c) = self.yaw.sin_cos();
        Pose2D::new(
            self.x + c * local.x - s * local.y,
            self.y + s * local.x + c * local.y,
            self.yaw + local.yaw,
        )
    }

    /// World position of a point given in body coordinates (x forward, y left).
    pub fn transform_point(&self, forward: f64, left: f64) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        (
            self.x + c * forward - s * left,
            self.y + s * forward + c * left,
        )
    }
}

/// Direction of travel along a drive segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Reverse => -1.0,
        }
    }

    pub fn from_signed(len: f64) -> Self {
        if len < 0.0 {
            Direction::Reverse
        } else {
            Direction::Forward
        }
    }
}

/// Advances `pose` by signed arc length `ds` along a path of constant curvature.
///
/// Negative `ds` drives backwards along the same circle.
pub fn integrate_arc(pose: &Pose2D, curvature: f64, ds: f64) -> Pose2D {
    let dyaw = curvature * ds;
    if dyaw.abs() < 1e-12 {
        let (s, c) = pose.yaw.sin_cos();
        return Pose2D::new(pose.x + ds * c, pose.y + ds * s, pose.yaw + dyaw);
    }
    let r = 1.0 / curvature;
    let yaw1 = pose.yaw + dyaw;
    Pose2D::new(
        pose.x + r * (yaw1.sin() - pose.yaw.sin()),
        pose.y - r * (yaw1.cos() - pose.yaw.cos()),
        yaw1,
    )
}

/// One point of a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub pose: Pose2D,
    /// Signed steering curvature in 1/m (positive turns left).
    pub curvature: f64,
    pub direction: Direction,
}

/// Samples an RS path from `start` with spacing at most `step`.
///
/// The first sample is `start`; each segment contributes its interior samples
/// and its end pose, so the last sample is the path's end pose.
pub fn sample_path(path: &RsPath, start: &Pose2D, step: f64) -> Vec<PathSample> {
    assert!(step > 0.0, "sample step must be positive");
    let mut out = Vec::new();
    let first = path.segments.iter().find(|s| s.length > 0.0);
    out.push(PathSample {
        pose: *start,
        curvature: first.map_or(0.0, |s| s.kind.curvature(path.turn_radius)),
        direction: first.map_or(Direction::Forward, |s| s.direction),
    });
    let mut pose = *start;
    for seg in path.segments.iter().filter(|s| s.length > 0.0) {
        let kappa = seg.kind.curvature(path.turn_radius);
        let n = (seg.length / step).ceil().max(1.0) as usize;
        let sign = seg.direction.sign();
        let seg_start = pose;
        for i in 1..=n {
            let ds = seg.length * i as f64 / n as f64;
            let p = integrate_arc(&seg_start, kappa, sign * ds);
            out.push(PathSample {
                pose: p,
                curvature: kappa,
                direction: seg.direction,
            });
        }
        pose = integrate_arc(&seg_start, kappa, sign * seg.length);
    }
    out
}
