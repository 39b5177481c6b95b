mod common;

use approx::assert_abs_diff_eq;
use common::{act, differential, domain, world};
use dynlgp::kinematics::{apply_switch, deduce_state, Holder, KinematicsError, Pose2};
use dynlgp::pddl::Atom;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn switch_deduction_matches_symbolic_exec() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, bad) = differential::walk(&mut rng, 200);
    assert!(n >= 200);
    assert_eq!(bad, 0);
}

#[test]
fn carried_object_travels_with_the_gripper() {
    let mut x = world([3.1, 0.05], &[("jug", "big-shelf", 3.1, 0.05)]);
    x = apply_switch(&x, &act("pick", &["jug", "big-shelf"])).unwrap();
    assert_eq!(x.holder("jug").unwrap(), Holder::Robot);
    x.set_robot(Pose2::new(0.1, 0.1, 1.0));
    let p = x.object_world("jug").unwrap();
    assert_abs_diff_eq!(p.xy()[0], 0.1, epsilon = 1e-12);
    assert_abs_diff_eq!(p.xy()[1], 0.1, epsilon = 1e-12);
    x = apply_switch(&x, &act("place", &["jug", "table"])).unwrap();
    let s = deduce_state(&x, &domain());
    assert!(s.contains(&Atom::new("on", &["jug", "table"])));
    assert!(s.contains(&Atom::new("agent-free", &[])));
}

#[test]
fn pick_out_of_reach_is_rejected() {
    let x = world([2.5, 0.0], &[("jug", "big-shelf", 3.1, 0.05)]);
    let err = apply_switch(&x, &act("pick", &["jug", "big-shelf"])).unwrap_err();
    assert!(matches!(err, KinematicsError::GraspTolerance { .. }));
}

#[test]
fn place_off_surface_is_rejected() {
    let mut x = world([3.1, 0.05], &[("jug", "big-shelf", 3.1, 0.05)]);
    x = apply_switch(&x, &act("pick", &["jug", "big-shelf"])).unwrap();
    x.set_robot(Pose2::new(1.5, 1.5, 0.0));
    assert!(apply_switch(&x, &act("place", &["jug", "table"])).is_err());
}

#[test]
fn human_pick_and_place_snap_to_nearest_surface() {
    let mut x = world([0.0, -2.0], &[("cup-red", "small-shelf", 0.1, 3.0)]);
    let mut h = x.human();
    h.hand = [0.15, 3.05, 1.0];
    x.set_human(h);
    x.human_pick("cup-red").unwrap();
    let s = deduce_state(&x, &domain());
    assert!(s.contains(&Atom::new("human-carry", &["cup-red"])));
    h.hand = [0.65, 0.1, 0.8];
    x.set_human(h);
    assert_eq!(x.human_place("cup-red").unwrap(), "table");
    let p = x.object_world("cup-red").unwrap().xy();
    assert!(x.surface("table").unwrap().contains(p, 0.0));
}

proptest! {
    #[test]
    fn fk_of_resting_object_is_its_world_position(px in -0.5..0.5f64, py in -0.3..0.3f64, rx in -5.0..5.0f64, ry in -5.0..5.0f64, phi in -3.0..3.0f64) {
        let mut x = world([0.0, 0.0], &[("bowl", "table", px, py)]);
        x.set_robot(Pose2::new(rx, ry, phi));
        let p = x.object_world("bowl").unwrap();
        prop_assert!((p.xy()[0] - px).abs() < 1e-12 && (p.xy()[1] - py).abs() < 1e-12);
        prop_assert!((p.xyz()[2] - 0.75).abs() < 1e-12);
    }
}
