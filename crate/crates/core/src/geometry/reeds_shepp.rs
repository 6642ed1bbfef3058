//! Reeds-Shepp shortest paths.
//!
//! Every closed-form word family is solved in normalized coordinates (unit
//! turning radius, start at the origin) and the shortest candidate wins.
//! Families are extended to all eight symmetric variants by time-flip,
//! reflection and, for the asymmetric families, path reversal.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::{integrate_arc, Direction, Pose2D};

const ZERO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Left,
    Right,
    Straight,
}

impl SegmentKind {
    /// Steering curvature for a vehicle with the given minimum turning radius.
    pub fn curvature(self, turn_radius: f64) -> f64 {
        match self {
            SegmentKind::Left => 1.0 / turn_radius,
            SegmentKind::Right => -1.0 / turn_radius,
            SegmentKind::Straight => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsSegment {
    pub kind: SegmentKind,
    pub direction: Direction,
    /// Unsigned length in meters.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsPath {
    pub segments: Vec<RsSegment>,
    pub turn_radius: f64,
    pub total_length: f64,
}

impl RsPath {
    pub fn from_segments(segments: Vec<RsSegment>, turn_radius: f64) -> Self {
        let total_length = segments.iter().map(|s| s.length).sum();
        RsPath {
            segments,
            turn_radius,
            total_length,
        }
    }

    /// Pose reached by following the path from `start`.
    pub fn end_pose(&self, start: &Pose2D) -> Pose2D {
        self.segments.iter().fold(*start, |pose, seg| {
            integrate_arc(
                &pose,
                seg.kind.curvature(self.turn_radius),
                seg.direction.sign() * seg.length,
            )
        })
    }

    /// Number of forward/reverse changes between consecutive nonzero segments.
    pub fn direction_switches(&self) -> usize {
        let dirs: Vec<Direction> = self
            .segments
            .iter()
            .filter(|s| s.length > 0.0)
            .map(|s| s.direction)
            .collect();
        dirs.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

use SegmentKind::{Left as L, Right as R, Straight as S};

/// A candidate in normalized units: segment kinds with signed lengths.
struct Word {
    kinds: [SegmentKind; 5],
    lengths: [f64; 5],
    n: usize,
}

impl Word {
    fn new(kinds: &[SegmentKind], lengths: &[f64]) -> Self {
        let mut k = [S; 5];
        let mut l = [0.0; 5];
        k[..kinds.len()].copy_from_slice(kinds);
        l[..lengths.len()].copy_from_slice(lengths);
        Word {
            kinds: k,
            lengths: l,
            n: kinds.len(),
        }
    }

    fn length(&self) -> f64 {
        self.lengths[..self.n].iter().map(|l| l.abs()).sum()
    }
}

/// Shortest Reeds-Shepp path from `start` to `goal` for the given turning radius.
pub fn rs_shortest_path(start: &Pose2D, goal: &Pose2D, turn_radius: f64) -> RsPath {
    assert!(turn_radius > 0.0, "turn radius must be positive");
    let rel = start.relative(goal);
    let (x, y, phi) = (rel.x / turn_radius, rel.y / turn_radius, rel.yaw);

    let mut best: Option<Word> = None;
    let mut consider = |w: Word| {
        if best.as_ref().is_none_or(|b| w.length() < b.length()) {
            best = Some(w);
        }
    };
    csc(x, y, phi, &mut consider);
    ccc(x, y, phi, &mut consider);
    cccc(x, y, phi, &mut consider);
    ccsc(x, y, phi, &mut consider);
    ccscc(x, y, phi, &mut consider);

    let word = best.expect("Reeds-Shepp words always cover the plane");
    let segments = word.kinds[..word.n]
        .iter()
        .zip(&word.lengths[..word.n])
        .filter(|(_, l)| l.abs() > ZERO)
        .map(|(&kind, &l)| RsSegment {
            kind,
            direction: Direction::from_signed(l),
            length: l.abs() * turn_radius,
        })
        .collect();
    RsPath::from_segments(segments, turn_radius)
}

/// Reeds-Shepp path length only.
pub fn rs_length(start: &Pose2D, goal: &Pose2D, turn_radius: f64) -> f64 {
    rs_shortest_path(start, goal, turn_radius).total_length
}

// Angle into [-π, π] (the closed range keeps the family formulas' sign tests intact).
fn mod2pi(x: f64) -> f64 {
    let v = x % (2.0 * PI);
    if v < -PI {
        v + 2.0 * PI
    } else if v > PI {
        v - 2.0 * PI
    } else {
        v
    }
}

fn polar(x: f64, y: f64) -> (f64, f64) {
    (x.hypot(y), y.atan2(x))
}

fn tau_omega(u: f64, v: f64, xi: f64, eta: f64, phi: f64) -> (f64, f64) {
    let delta = mod2pi(u - v);
    let a = u.sin() - delta.sin();
    let b = u.cos() - delta.cos() - 1.0;
    let t1 = (eta * a - xi * b).atan2(xi * a + eta * b);
    let t2 = 2.0 * (delta.cos() - v.cos() - u.cos()) + 3.0;
    let tau = if t2 < 0.0 { mod2pi(t1 + PI) } else { mod2pi(t1) };
    (tau, mod2pi(tau - u + v - phi))
}

fn lp_sp_lp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u, t) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if t >= -ZERO {
        let v = mod2pi(phi - t);
        if v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_sp_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u1, t1) = polar(x + phi.sin(), y - 1.0 - phi.cos());
    let u1 = u1 * u1;
    if u1 >= 4.0 {
        let u = (u1 - 4.0).sqrt();
        let theta = 2.0_f64.atan2(u);
        let t = mod2pi(t1 + theta);
        let v = mod2pi(t - phi);
        if t >= -ZERO && v >= -ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_l(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (u1, theta) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if u1 <= 4.0 {
        let u = -2.0 * (0.25 * u1).asin();
        let t = mod2pi(theta + 0.5 * u + PI);
        let v = mod2pi(phi - t + u);
        if t >= -ZERO && u <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rup_lum_rm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = 0.25 * (2.0 + xi.hypot(eta));
    if rho <= 1.0 {
        let u = rho.acos();
        let (t, v) = tau_omega(u, -u, xi, eta, phi);
        if t >= -ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rum_lum_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let rho = (20.0 - xi * xi - eta * eta) / 16.0;
    if (0.0..=1.0).contains(&rho) {
        let u = -rho.acos();
        if u >= -FRAC_PI_2 {
            let (t, v) = tau_omega(u, u, xi, eta, phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

fn lp_rm_sm_lm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let (rho, theta) = polar(x - phi.sin(), y - 1.0 + phi.cos());
    if rho >= 2.0 {
        let r = (rho * rho - 4.0).sqrt();
        let u = 2.0 - r;
        let t = mod2pi(theta + r.atan2(-2.0));
        let v = mod2pi(phi - FRAC_PI_2 - t);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_sm_rm(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, theta) = polar(-eta, xi);
    if rho >= 2.0 {
        let t = theta;
        let u = 2.0 - rho;
        let v = mod2pi(t + FRAC_PI_2 - phi);
        if t >= -ZERO && u <= ZERO && v <= ZERO {
            return Some((t, u, v));
        }
    }
    None
}

fn lp_rm_s_lm_rp(x: f64, y: f64, phi: f64) -> Option<(f64, f64, f64)> {
    let xi = x + phi.sin();
    let eta = y - 1.0 - phi.cos();
    let (rho, _) = polar(xi, eta);
    if rho >= 2.0 {
        let u = 4.0 - (rho * rho - 4.0).sqrt();
        if u <= ZERO {
            let t = mod2pi(((4.0 - u) * xi - 2.0 * eta).atan2(-2.0 * xi + (u - 4.0) * eta));
            let v = mod2pi(t - phi);
            if t >= -ZERO && v >= -ZERO {
                return Some((t, u, v));
            }
        }
    }
    None
}

type Solver = fn(f64, f64, f64) -> Option<(f64, f64, f64)>;

/// Runs `solver` on the four symmetric variants of the query.
///
/// `build(t, u, v, sign)` maps a solution to lengths; `kinds`/`reflected`
/// give the letters for the plain and mirrored variants.
fn symmetric<F>(
    x: f64,
    y: f64,
    phi: f64,
    solver: Solver,
    kinds: &[SegmentKind],
    reflected: &[SegmentKind],
    build: F,
    out: &mut impl FnMut(Word),
) where
    F: Fn(f64, f64, f64, f64) -> Vec<f64>,
{
    let variants = [
        (x, y, phi, 1.0, false),
        (-x, y, -phi, -1.0, false),
        (x, -y, -phi, 1.0, true),
        (-x, -y, phi, -1.0, true),
    ];
    for (qx, qy, qphi, sign, mirror) in variants {
        if let Some((t, u, v)) = solver(qx, qy, qphi) {
            let letters = if mirror { reflected } else { kinds };
            out(Word::new(letters, &build(t, u, v, sign)));
        }
    }
}

fn csc(x: f64, y: f64, phi: f64, out: &mut impl FnMut(Word)) {
    let b = |t: f64, u: f64, v: f64, s: f64| vec![s * t, s * u, s * v];
    symmetric(x, y, phi, lp_sp_lp, &[L, S, L], &[R, S, R], b, out);
    symmetric(x, y, phi, lp_sp_rp, &[L, S, R], &[R, S, L], b, out);
}

fn ccc(x: f64, y: f64, phi: f64, out: &mut impl FnMut(Word)) {
    symmetric(
        x,
        y,
        phi,
        lp_rm_l,
        &[L, R, L],
        &[R, L, R],
        |t, u, v, s| vec![s * t, s * u, s * v],
        out,
    );
    let (xb, yb) = backwards(x, y, phi);
    symmetric(
        xb,
        yb,
        phi,
        lp_rm_l,
        &[L, R, L],
        &[R, L, R],
        |t, u, v, s| vec![s * v, s * u, s * t],
        out,
    );
}

fn cccc(x: f64, y: f64, phi: f64, out: &mut impl FnMut(Word)) {
    symmetric(
        x,
        y,
        phi,
        lp_rup_lum_rm,
        &[L, R, L, R],
        &[R, L, R, L],
        |t, u, v, s| vec![s * t, s * u, -s * u, s * v],
        out,
    );
    symmetric(
        x,
        y,
        phi,
        lp_rum_lum_rp,
        &[L, R, L, R],
        &[R, L, R, L],
        |t, u, v, s| vec![s * t, s * u, s * u, s * v],
        out,
    );
}

fn ccsc(x: f64, y: f64, phi: f64, out: &mut impl FnMut(Word)) {
    let fwd = |t: f64, u: f64, v: f64, s: f64| vec![s * t, -s * FRAC_PI_2, s * u, s * v];
    symmetric(x, y, phi, lp_rm_sm_lm, &[L, R, S, L], &[R, L, S, R], fwd, out);
    symmetric(x, y, phi, lp_rm_sm_rm, &[L, R, S, R], &[R, L, S, L], fwd, out);

    let (xb, yb) = backwards(x, y, phi);
    let bwd = |t: f64, u: f64, v: f64, s: f64| vec![s * v, s * u, -s * FRAC_PI_2, s * t];
    symmetric(xb, yb, phi, lp_rm_sm_lm, &[L, S, R, L], &[R, S, L, R], bwd, out);
    symmetric(xb, yb, phi, lp_rm_sm_rm, &[R, S, R, L], &[L, S, L, R], bwd, out);
}

fn ccscc(x: f64, y: f64, phi: f64, out: &mut impl FnMut(Word)) {
    symmetric(
        x,
        y,
        phi,
        lp_rm_s_lm_rp,
        &[L, R, S, L, R],
        &[R, L, S, R, L],
        |t, u, v, s| vec![s * t, -s * FRAC_PI_2, s * u, -s * FRAC_PI_2, s * v],
        out,
    );
}

// Goal-to-start view used by the families that are solved in reverse order.
fn backwards(x: f64, y: f64, phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    (x * c + y * s, x * s - y * c)
}
