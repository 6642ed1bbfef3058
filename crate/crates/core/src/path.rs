//! Planned and driven paths made of drive and rotation segments.

use serde::{Deserialize, Serialize};

use crate::geometry::{angle_diff, integrate_arc, Direction, PathSample, Pose2D};

/// Constant-direction stretch of driving. `s[i]` is the arc length of
/// `samples[i]` from the segment start; the curvature of a sample is the
/// curvature of the arc leading to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSegment {
    pub direction: Direction,
    pub samples: Vec<PathSample>,
    pub s: Vec<f64>,
}

impl DriveSegment {
    pub fn length(&self) -> f64 {
        self.s.last().copied().unwrap_or(0.0)
    }

    pub fn start_pose(&self) -> Pose2D {
        self.samples[0].pose
    }

    pub fn end_pose(&self) -> Pose2D {
        self.samples[self.samples.len() - 1].pose
    }

    // index i with s[i] < offset <= s[i + 1], clamped to the segment
    fn arc_index(&self, offset: f64) -> usize {
        let k = self.s.partition_point(|&v| v < offset);
        k.clamp(1, self.s.len() - 1) - 1
    }

    /// Curvature in effect at `offset`.
    pub fn curvature_at(&self, offset: f64) -> f64 {
        if offset <= 0.0 {
            return self.samples[0].curvature;
        }
        self.samples[self.arc_index(offset) + 1].curvature
    }

    /// Pose at arc length `offset`, exact on the sampled arcs.
    pub fn pose_at(&self, offset: f64) -> Pose2D {
        let offset = offset.clamp(0.0, self.length());
        let i = self.arc_index(offset);
        if offset == self.s[i + 1] {
            return self.samples[i + 1].pose;
        }
        let next = &self.samples[i + 1];
        integrate_arc(
            &self.samples[i].pose,
            next.curvature,
            self.direction.sign() * (offset - self.s[i]),
        )
    }

    /// Sub-segment between two offsets, `None` when empty.
    pub fn slice(&self, from: f64, to: f64) -> Option<DriveSegment> {
        let from = from.clamp(0.0, self.length());
        let to = to.clamp(0.0, self.length());
        if to - from <= 1e-12 {
            return None;
        }
        let mut seg = DriveSegment {
            direction: self.direction,
            samples: vec![PathSample {
                pose: self.pose_at(from),
                curvature: self.curvature_at(from.max(1e-12).min(to)),
                direction: self.direction,
            }],
            s: vec![0.0],
        };
        for (sample, &s) in self.samples.iter().zip(&self.s) {
            if s > from + 1e-12 && s < to - 1e-12 {
                seg.samples.push(*sample);
                seg.s.push(s - from);
            }
        }
        seg.samples.push(PathSample {
            pose: self.pose_at(to),
            curvature: self.curvature_at(to),
            direction: self.direction,
        });
        seg.s.push(to - from);
        Some(seg)
    }
}

/// In-place rotation about the rear axle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSegment {
    pub x: f64,
    pub y: f64,
    pub from_yaw: f64,
    pub to_yaw: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Segment {
    Drive(DriveSegment),
    Rotation(RotationSegment),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPath {
    pub start: Pose2D,
    pub segments: Vec<Segment>,
}

/// Position on a path: a segment index and the arc length into it. A cursor
/// on a rotation segment means the rotation is still ahead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCursor {
    pub segment: usize,
    pub offset: f64,
}

impl PathCursor {
    pub const START: PathCursor = PathCursor {
        segment: 0,
        offset: 0.0,
    };
}

impl PlannedPath {
    pub fn new(start: Pose2D) -> Self {
        PlannedPath {
            start,
            segments: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn end_pose(&self) -> Pose2D {
        match self.segments.last() {
            None => self.start,
            Some(Segment::Drive(d)) => d.end_pose(),
            Some(Segment::Rotation(r)) => Pose2D::new(r.x, r.y, r.to_yaw),
        }
    }

    pub fn total_drive_length(&self) -> f64 {
        self.drives().map(DriveSegment::length).sum()
    }

    pub fn n_rotations(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| matches!(s, Segment::Rotation(_)))
            .count()
    }

    /// Forward/reverse changes between drive segments; a rotation in between
    /// resets the direction.
    pub fn n_direction_switches(&self) -> usize {
        let mut last: Option<Direction> = None;
        let mut n = 0;
        for seg in &self.segments {
            match seg {
                Segment::Drive(d) => {
                    if last.is_some_and(|l| l != d.direction) {
                        n += 1;
                    }
                    last = Some(d.direction);
                }
                Segment::Rotation(_) => last = None,
            }
        }
        n
    }

    pub fn drives(&self) -> impl Iterator<Item = &DriveSegment> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Drive(d) => Some(d),
            Segment::Rotation(_) => None,
        })
    }

    /// Every pose on the path in order: drive samples and rotation end poses.
    pub fn poses(&self) -> Vec<Pose2D> {
        let mut out = vec![self.start];
        for seg in &self.segments {
            match seg {
                Segment::Drive(d) => out.extend(d.samples.iter().skip(1).map(|s| s.pose)),
                Segment::Rotation(r) => out.push(Pose2D::new(r.x, r.y, r.to_yaw)),
            }
        }
        out
    }

    /// Appends a constant-curvature motion of signed length, sampled at most
    /// `step` apart. Same-direction motions extend the last drive segment.
    pub fn push_arc(&mut self, curvature: f64, signed_length: f64, step: f64) {
        if signed_length.abs() <= 1e-12 {
            return;
        }
        let direction = Direction::from_signed(signed_length);
        let origin = self.end_pose();
        let extend = matches!(self.segments.last(), Some(Segment::Drive(d)) if d.direction == direction);
        if !extend {
            self.segments.push(Segment::Drive(DriveSegment {
                direction,
                samples: vec![PathSample {
                    pose: origin,
                    curvature,
                    direction,
                }],
                s: vec![0.0],
            }));
        }
        let Some(Segment::Drive(seg)) = self.segments.last_mut() else {
            unreachable!("a drive segment was just ensured");
        };
        let base = seg.length();
        let len = signed_length.abs();
        let n = (len / step).ceil().max(1.0) as usize;
        for i in 1..=n {
            let ds = len * i as f64 / n as f64;
            seg.samples.push(PathSample {
                pose: integrate_arc(&origin, curvature, direction.sign() * ds),
                curvature,
                direction,
            });
            seg.s.push(base + ds);
        }
    }

    pub fn push_rotation(&mut self, delta: f64) {
        let p = self.end_pose();
        self.segments.push(Segment::Rotation(RotationSegment {
            x: p.x,
            y: p.y,
            from_yaw: p.yaw,
            to_yaw: Pose2D::new(p.x, p.y, p.yaw + delta).yaw,
            delta,
        }));
    }

    fn push_segment(&mut self, seg: Segment) {
        if let (Some(Segment::Drive(last)), Segment::Drive(next)) = (self.segments.last_mut(), &seg) {
            if last.direction == next.direction {
                let base = last.length();
                last.samples.extend(next.samples.iter().skip(1));
                last.s.extend(next.s.iter().skip(1).map(|s| s + base));
                return;
            }
        }
        self.segments.push(seg);
    }

    /// Appends `other`, which must start where this path ends.
    pub fn append(&mut self, other: &PlannedPath) {
        let end = self.end_pose();
        debug_assert!(end.distance_to(&other.start) < 1e-6, "paths are not contiguous");
        debug_assert!(angle_diff(end.yaw, other.start.yaw).abs() < 1e-6);
        for seg in &other.segments {
            self.push_segment(seg.clone());
        }
    }

    /// Cursor after driving `s` meters; rotations located exactly at `s` are
    /// still ahead of it.
    pub fn cursor_at(&self, s: f64) -> PathCursor {
        let mut rest = s.max(0.0);
        for (i, seg) in self.segments.iter().enumerate() {
            if let Segment::Drive(d) = seg {
                if rest <= d.length() {
                    return PathCursor {
                        segment: i,
                        offset: rest,
                    }
                    .normalized(self);
                }
                rest -= d.length();
            }
        }
        self.end_cursor()
    }

    pub fn end_cursor(&self) -> PathCursor {
        PathCursor {
            segment: self.segments.len(),
            offset: 0.0,
        }
    }

    /// Driven arc length up to `cursor`.
    pub fn drive_s(&self, cursor: PathCursor) -> f64 {
        let before: f64 = self.segments[..cursor.segment.min(self.segments.len())]
            .iter()
            .map(|s| match s {
                Segment::Drive(d) => d.length(),
                Segment::Rotation(_) => 0.0,
            })
            .sum();
        before + cursor.offset
    }

    pub fn pose_at(&self, cursor: PathCursor) -> Pose2D {
        match self.segments.get(cursor.segment) {
            None => self.end_pose(),
            Some(Segment::Drive(d)) => d.pose_at(cursor.offset),
            Some(Segment::Rotation(r)) => Pose2D::new(r.x, r.y, r.from_yaw),
        }
    }

    pub fn at_end(&self, cursor: PathCursor) -> bool {
        cursor.segment >= self.segments.len()
    }

    /// Advances by one simulation step: a pending rotation is executed whole,
    /// otherwise up to `step` meters of the current drive segment, stopping on
    /// the last sample within reach (or the next sample if none is).
    pub fn advance(&self, cursor: PathCursor, step: f64) -> PathCursor {
        match self.segments.get(cursor.segment) {
            None => cursor,
            Some(Segment::Rotation(_)) => PathCursor {
                segment: cursor.segment + 1,
                offset: 0.0,
            },
            Some(Segment::Drive(d)) => {
                let target = (cursor.offset + step).min(d.length());
                let k = d.s.partition_point(|&s| s <= target + 1e-9);
                let offset = match d.s[..k].last() {
                    Some(&s) if s > cursor.offset + 1e-9 => s,
                    _ => d.s[k.min(d.s.len() - 1)],
                };
                PathCursor {
                    segment: cursor.segment,
                    offset,
                }
                .normalized(self)
            }
        }
    }

    /// Moves `cursor` back to the last sample at or before it. Cursors on a
    /// rotation or at the end are returned unchanged.
    pub fn snap_back(&self, cursor: PathCursor) -> PathCursor {
        let Some(Segment::Drive(d)) = self.segments.get(cursor.segment) else {
            return cursor;
        };
        let k = d.s.partition_point(|&s| s <= cursor.offset + 1e-9);
        PathCursor {
            segment: cursor.segment,
            offset: d.s[k.saturating_sub(1)],
        }
    }

    /// The part of the path between two cursors.
    pub fn slice(&self, from: PathCursor, to: PathCursor) -> PlannedPath {
        let mut out = PlannedPath::new(self.pose_at(from));
        for i in from.segment..self.segments.len().min(to.segment + 1) {
            let a = if i == from.segment { from.offset } else { 0.0 };
            match &self.segments[i] {
                Segment::Rotation(_) if i == to.segment => break,
                Segment::Rotation(r) => out.push_segment(Segment::Rotation(*r)),
                Segment::Drive(d) => {
                    let b = if i == to.segment { to.offset } else { d.length() };
                    if let Some(part) = d.slice(a, b) {
                        out.push_segment(Segment::Drive(part));
                    }
                }
            }
        }
        out
    }
}

impl PathCursor {
    // a cursor at the end of a drive segment moves to the next segment
    fn normalized(self, path: &PlannedPath) -> PathCursor {
        match path.segments.get(self.segment) {
            Some(Segment::Drive(d)) if self.offset >= d.length() => PathCursor {
                segment: self.segment + 1,
                offset: 0.0,
            },
            _ => self,
        }
    }
}
