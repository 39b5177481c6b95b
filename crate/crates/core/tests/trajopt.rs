mod common;

use std::time::Instant;

use common::nlp::{line_problem, long_skeleton, segment_distance};
use common::{act, oracle, random, skeleton, transfer, world};
use dynlgp::kinematics::{HumanConfig, Pose2};
use dynlgp::trajopt::{
    build_nlp, evaluate, objective, solve, Anchor, Constraint, ConstraintKind, NlpParams, SolverConfig, Tag,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn analytic_jacobians_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let (p, w) = random::problem(&mut rng);
        let err = oracle::jacobian_error(&p, &w);
        assert!(err <= 1e-4, "relative error {err}");
    }
}

#[test]
fn uniform_line_cost_closed_form() {
    let p = line_problem([3.0, 0.0], 30);
    let w: Vec<_> = (1..=30).map(|t| Pose2::new(0.1 * t as f64, 0.0, 0.0)).collect();
    let e = evaluate(&p, &w).unwrap();
    // w_v · N · (step / dt)², acceleration zero.
    let expected = 1.0 * 30.0 * (0.1f64 / 0.1).powi(2);
    assert!((e.objective - expected).abs() < 1e-9, "{}", e.objective);
}

#[test]
fn free_move_is_collinear() {
    let target = [2.0, 1.0];
    let p = line_problem(target, 30);
    let sol = solve(&p, &SolverConfig::default(), None).unwrap();
    assert!(sol.converged);
    for w in &sol.waypoints {
        assert!(segment_distance(w.xy(), [0.0, 0.0], target) < 1e-6);
    }
}

#[test]
fn human_on_segment_forces_detour() {
    let target = [2.0, 0.0];
    let free = solve(&line_problem(target, 30), &SolverConfig::default(), None).unwrap();
    let mut p = line_problem(target, 30);
    for i in 0..30 {
        p.constraints.push(Constraint {
            step: i,
            anchor: Anchor::Base,
            kind: ConstraintKind::Clearance { center: [1.0, 0.0], radius: 0.5 },
            tag: Tag::Human,
        });
    }
    p.constraints.sort_by_key(|c| c.step);
    let sol = solve(&p, &SolverConfig::default(), None).unwrap();
    assert!(sol.converged, "{sol:?}");
    for w in &sol.waypoints {
        let d = ((w.x - 1.0).powi(2) + w.y.powi(2)).sqrt();
        assert!(d >= 0.5 - 1e-3);
    }
    assert!(sol.objective > free.objective);
}

#[test]
fn converged_certificate_is_honest_and_deterministic() {
    let x = world([0.0, 1.5], &[("cup-green", "big-shelf", 3.1, 0.0)]);
    let sk = skeleton(transfer("cup-green", "big-shelf", "table"));
    let human: Vec<_> = (0..80)
        .map(|t| HumanConfig::standing([1.5, -1.0 + 0.03 * t as f64]))
        .collect();
    let p = build_nlp(&sk, &x, &human, 0, &NlpParams::default()).unwrap();
    let cfg = SolverConfig { record_trace: true, ..SolverConfig::default() };
    let a = solve(&p, &cfg, None).unwrap();
    let b = solve(&p, &cfg, None).unwrap();
    assert_eq!(a.waypoints, b.waypoints);
    assert!(a.converged);
    let e = evaluate(&p, &a.waypoints).unwrap();
    assert!(e.max_eq() < 1e-3 && e.max_ineq_violation() <= 0.0);
    for w in a.trace.windows(2) {
        if w[0].stage == w[1].stage {
            assert!(w[1].merit <= w[0].merit + 1e-9 * w[0].merit.abs());
        }
    }
    let again = solve(&p, &cfg, Some(&a.waypoints)).unwrap();
    assert!(again.iterations <= 2);
}

#[test]
fn length_sixteen_skeleton_converges() {
    for move_steps in [30, 50] {
        let (x, sk) = long_skeleton(move_steps);
        assert_eq!(sk.len(), 16);
        let human: Vec<_> = (0..500)
            .map(|t| HumanConfig::standing([1.5 + (t as f64 * 0.02).sin(), -1.0]))
            .collect();
        let p = build_nlp(&sk, &x, &human, 0, &NlpParams::default()).unwrap();
        let t0 = Instant::now();
        let sol = solve(&p, &SolverConfig::default(), None).unwrap();
        let secs = t0.elapsed().as_secs_f64();
        assert!(sol.converged, "steps {} max_eq {}", p.steps, sol.max_eq);
        assert!(secs < 60.0);
    }
}

#[test]
fn place_respects_surface_and_objects() {
    let x = world(
        [0.0, 1.5],
        &[("cup-green", "big-shelf", 3.1, 0.0), ("plate-blue", "table", 0.0, 0.0)],
    );
    let sk = skeleton(transfer("cup-green", "big-shelf", "table"));
    let p = build_nlp(&sk, &x, &[], 0, &NlpParams::default()).unwrap();
    let sol = solve(&p, &SolverConfig::default(), None).unwrap();
    assert!(sol.converged);
    let end = sol.waypoints[p.phases[3].end().unwrap()];
    assert!(end.x.hypot(end.y) >= 0.15 - 1e-9);
    assert!(end.x.abs() <= 0.55 && end.y.abs() <= 0.35);
    let _ = act("move", &["table"]);
}

#[test]
fn objective_matches_full_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (p, w) = random::problem(&mut rng);
        let full = evaluate(&p, &w).unwrap().objective;
        let fast = objective(&p, &w).unwrap();
        assert!((full - fast).abs() <= 1e-12 * full.abs().max(1.0), "{full} vs {fast}");
    }
}
