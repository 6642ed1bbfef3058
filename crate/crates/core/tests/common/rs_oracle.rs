//! Brute-force Reeds-Shepp oracle.
//!
//! Enumerates the 48 optimal-candidate words by family structure (letters,
//! cusps, tied and fixed arcs) and solves each one numerically: the last arc
//! is fixed by the heading constraint, the remaining two free lengths are found
//! by damped Newton iterations from a grid of starting points. Shares no code
//! with the closed-form solver.

use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Copy, PartialEq, Debug)]
enum Letter {
    L,
    R,
    S,
}

#[derive(Clone, Copy, Debug)]
enum Len {
    /// First free parameter.
    A,
    /// Second free parameter.
    B,
    /// Fixed quarter turn.
    Quarter,
    /// Closing arc, solved from the heading constraint.
    Close,
}

#[derive(Clone, Copy, Debug)]
pub struct Seg {
    letter: Letter,
    dir: f64,
    len: Len,
}

fn seg(letter: Letter, dir: f64, len: Len) -> Seg {
    Seg { letter, dir, len }
}

fn base_words() -> Vec<Vec<Seg>> {
    use Len::*;
    use Letter::*;
    vec![
        // C|C|C
        vec![seg(L, 1., A), seg(R, -1., B), seg(L, 1., Close)],
        // CC|C
        vec![seg(L, 1., A), seg(R, 1., B), seg(L, -1., Close)],
        // C|CC
        vec![seg(L, 1., A), seg(R, -1., B), seg(L, -1., Close)],
        // CSC
        vec![seg(L, 1., A), seg(S, 1., B), seg(L, 1., Close)],
        vec![seg(L, 1., A), seg(S, 1., B), seg(R, 1., Close)],
        // CC_u|C_uC
        vec![
            seg(L, 1., A),
            seg(R, 1., B),
            seg(L, -1., B),
            seg(R, -1., Close),
        ],
        // C|C_uC_u|C
        vec![
            seg(L, 1., A),
            seg(R, -1., B),
            seg(L, -1., B),
            seg(R, 1., Close),
        ],
        // C|C_{pi/2}SC
        vec![
            seg(L, 1., A),
            seg(R, -1., Quarter),
            seg(S, -1., B),
            seg(L, -1., Close),
        ],
        vec![
            seg(L, 1., A),
            seg(R, -1., Quarter),
            seg(S, -1., B),
            seg(R, -1., Close),
        ],
        // CSC_{pi/2}|C
        vec![
            seg(L, 1., A),
            seg(S, 1., B),
            seg(R, 1., Quarter),
            seg(L, -1., Close),
        ],
        vec![
            seg(L, 1., A),
            seg(S, 1., B),
            seg(L, 1., Quarter),
            seg(R, -1., Close),
        ],
        // C|C_{pi/2}SC_{pi/2}|C
        vec![
            seg(L, 1., A),
            seg(R, -1., Quarter),
            seg(S, -1., B),
            seg(L, -1., Quarter),
            seg(R, 1., Close),
        ],
    ]
}

/// All 48 words: each base word under reflection (L<->R) and time flip.
pub fn all_words() -> Vec<Vec<Seg>> {
    let mut out = Vec::new();
    for w in base_words() {
        for reflect in [false, true] {
            for flip in [false, true] {
                out.push(
                    w.iter()
                        .map(|s| Seg {
                            letter: match (s.letter, reflect) {
                                (Letter::L, true) => Letter::R,
                                (Letter::R, true) => Letter::L,
                                (l, _) => l,
                            },
                            dir: if flip { -s.dir } else { s.dir },
                            len: s.len,
                        })
                        .collect(),
                );
            }
        }
    }
    out
}

fn turn(letter: Letter) -> f64 {
    match letter {
        Letter::L => 1.0,
        Letter::R => -1.0,
        Letter::S => 0.0,
    }
}

fn wrap(a: f64) -> f64 {
    let mut r = a % (2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r < -PI {
        r += 2.0 * PI;
    }
    r
}

/// Closing-arc length in [0, 2π) that makes the heading come out to `phi`.
fn closing(word: &[Seg], a: f64, b: f64, phi: f64) -> f64 {
    let mut heading = 0.0;
    let mut close_rate = 0.0;
    for s in word {
        let l = match s.len {
            Len::A => a,
            Len::B => b,
            Len::Quarter => FRAC_PI_2,
            Len::Close => {
                close_rate = turn(s.letter) * s.dir;
                continue;
            }
        };
        heading += turn(s.letter) * s.dir * l;
    }
    let v = (phi - heading) / close_rate;
    v.rem_euclid(2.0 * PI)
}

fn lengths(word: &[Seg], a: f64, b: f64, c: f64) -> Vec<f64> {
    word.iter()
        .map(|s| match s.len {
            Len::A => a,
            Len::B => b,
            Len::Quarter => FRAC_PI_2,
            Len::Close => c,
        })
        .collect()
}

fn endpoint(word: &[Seg], lens: &[f64]) -> (f64, f64, f64) {
    let (mut x, mut y, mut th) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (s, &l) in word.iter().zip(lens) {
        let d = s.dir * l;
        match s.letter {
            Letter::S => {
                x += d * th.cos();
                y += d * th.sin();
            }
            letter => {
                let k = turn(letter);
                let th1 = th + k * d;
                x += (th1.sin() - th.sin()) / k;
                y -= (th1.cos() - th.cos()) / k;
                th = th1;
            }
        }
    }
    (x, y, th)
}

fn residual(word: &[Seg], a: f64, b: f64, goal: (f64, f64, f64)) -> (f64, f64, f64) {
    let c = closing(word, a, b, goal.2);
    let (x, y, _) = endpoint(word, &lengths(word, a, b, c));
    (x - goal.0, y - goal.1, c)
}

fn is_straight(word: &[Seg], which: Len) -> bool {
    word.iter()
        .any(|s| matches!((s.len, which), (Len::B, Len::B) if s.letter == Letter::S))
}

/// Shortest length of `word` reaching the normalized goal, if it has a solution.
fn solve_word(word: &[Seg], goal: (f64, f64, f64)) -> Option<f64> {
    let scale = goal.0.hypot(goal.1).max(1.0);
    let arc_starts = [0.05, 0.5, 1.0, 1.6, 2.2, 2.9, 3.6, 4.4, 5.2, 6.0];
    let b_starts: Vec<f64> = if is_straight(word, Len::B) {
        [0.0, 0.1, 0.3, 0.6, 1.0, 1.5]
            .iter()
            .map(|f| f * scale + 0.05)
            .collect()
    } else {
        arc_starts.to_vec()
    };
    let mut best: Option<f64> = None;
    for &a0 in &arc_starts {
        for &b0 in &b_starts {
            let (mut a, mut b) = (a0, b0);
            let mut converged = false;
            for _ in 0..60 {
                let (fx, fy, _) = residual(word, a, b, goal);
                if fx.hypot(fy) < 1e-12 {
                    converged = true;
                    break;
                }
                let h = 1e-7;
                let (ax, ay, _) = residual(word, a + h, b, goal);
                let (bx, by, _) = residual(word, a, b + h, goal);
                let j11 = (ax - fx) / h;
                let j21 = (ay - fy) / h;
                let j12 = (bx - fx) / h;
                let j22 = (by - fy) / h;
                let det = j11 * j22 - j12 * j21;
                if det.abs() < 1e-14 {
                    break;
                }
                let da = (j22 * fx - j12 * fy) / det;
                let db = (-j21 * fx + j11 * fy) / det;
                let step = (da.hypot(db) / 1.0).max(1.0);
                a -= da / step;
                b -= db / step;
                if !(a.is_finite() && b.is_finite()) || a < -1.0 || b < -1.0 {
                    break;
                }
            }
            if !converged || a < -1e-9 || b < -1e-9 {
                continue;
            }
            let (_, _, c) = residual(word, a, b, goal);
            let lens = lengths(word, a.max(0.0), b.max(0.0), c);
            let (x, y, th) = endpoint(word, &lens);
            if (x - goal.0).hypot(y - goal.1) > 1e-9 || wrap(th - goal.2).abs() > 1e-9 {
                continue;
            }
            let total: f64 = lens.iter().sum();
            if best.is_none_or(|v| total < v) {
                best = Some(total);
            }
        }
    }
    best
}

/// Oracle length of the shortest Reeds-Shepp path between two poses.
pub fn brute_force_rs_length(
    start: (f64, f64, f64),
    goal: (f64, f64, f64),
    turn_radius: f64,
) -> f64 {
    let (s, c) = start.2.sin_cos();
    let dx = goal.0 - start.0;
    let dy = goal.1 - start.1;
    let local = (
        (c * dx + s * dy) / turn_radius,
        (-s * dx + c * dy) / turn_radius,
        wrap(goal.2 - start.2),
    );
    all_words()
        .iter()
        .filter_map(|w| solve_word(w, local))
        .fold(f64::INFINITY, f64::min)
        * turn_radius
}
