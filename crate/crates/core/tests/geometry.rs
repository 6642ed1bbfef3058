mod common;

use std::f64::consts::PI;

use common::rs_oracle::{all_words, brute_force_rs_length};
use hybrid_astar::geometry::{angle_diff, integrate_arc, rs_shortest_path, sample_path};
use hybrid_astar::Pose2D;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_covers_48_words() {
    assert_eq!(all_words().len(), 48);
}

#[test]
fn half_turn_matches_oracle() {
    let start = Pose2D::origin();
    let goal = Pose2D::new(0.0, 2.0, PI);
    let oracle = brute_force_rs_length((0.0, 0.0, 0.0), (0.0, 2.0, PI), 1.0);
    println!("oracle half-turn length = {oracle:.12}");
    let p = rs_shortest_path(&start, &goal, 1.0);
    assert!((p.total_length - oracle).abs() < 1e-6);
}

#[test]
fn closed_form_matches_oracle_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let a = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-PI..PI));
        let b = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-PI..PI));
        let r = rng.gen_range(0.5..5.0);
        let p = rs_shortest_path(&Pose2D::new(a.0, a.1, a.2), &Pose2D::new(b.0, b.1, b.2), r);
        let oracle = brute_force_rs_length(a, b, r);
        assert!((p.total_length - oracle).abs() < 1e-6, "{a:?} {b:?} r={r}: {} vs {oracle}", p.total_length);
    }
}

fn pose() -> impl Strategy<Value = Pose2D> {
    (-30.0..30.0f64, -30.0..30.0f64, -PI..PI).prop_map(|(x, y, t)| Pose2D::new(x, y, t))
}

proptest! {
    #[test]
    fn length_invariant_under_rigid_motion(a in pose(), b in pose(), m in pose(), r in 0.5..6.0f64) {
        let l0 = rs_shortest_path(&a, &b, r).total_length;
        let l1 = rs_shortest_path(&m.compose(&a), &m.compose(&b), r).total_length;
        prop_assert!((l0 - l1).abs() < 1e-6);
    }

    #[test]
    fn length_at_least_euclidean(a in pose(), b in pose(), r in 0.5..6.0f64) {
        let l = rs_shortest_path(&a, &b, r).total_length;
        prop_assert!(l + 1e-9 >= a.distance_to(&b));
    }

    #[test]
    fn sampled_curvature_reintegrates_to_goal(a in pose(), b in pose(), r in 0.5..6.0f64) {
        let path = rs_shortest_path(&a, &b, r);
        let samples = sample_path(&path, &a, 0.25);
        let mut pose = a;
        for w in samples.windows(2) {
            // each step lies on one segment: its sample carries that segment's data
            let seg = w[1];
            let ds = arc_between(&pose, &seg.pose, seg.curvature);
            pose = integrate_arc(&pose, seg.curvature, seg.direction.sign() * ds);
        }
        prop_assert!(pose.distance_to(&b) < 1e-6);
        prop_assert!(angle_diff(pose.yaw, b.yaw) < 1e-6);
    }
}

// Unsigned arc length between two poses on a common circle or line.
fn arc_between(a: &Pose2D, b: &Pose2D, curvature: f64) -> f64 {
    if curvature.abs() < 1e-12 {
        a.distance_to(b)
    } else {
        (angle_diff(b.yaw, a.yaw) / curvature.abs()).max(0.0)
    }
}
