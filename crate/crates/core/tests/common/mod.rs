#![allow(dead_code)]

use dynlgp::kinematics::{GeometricState, HumanConfig, Pose2, Surface};
use dynlgp::pddl::{ground_actions, parse_domain, Domain, GroundedAction, SET_TABLE_DOMAIN};
use dynlgp::symbolic::{PhaseDurations, Skeleton};

pub fn domain() -> Domain {
    parse_domain(SET_TABLE_DOMAIN).unwrap()
}

pub fn act(name: &str, args: &[&str]) -> GroundedAction {
    ground_actions(&domain())
        .into_iter()
        .find(|a| a.name == name && a.args.iter().map(String::as_str).eq(args.iter().copied()))
        .unwrap_or_else(|| panic!("no action {name}{args:?}"))
}

pub fn surfaces() -> Vec<Surface<f64>> {
    vec![
        Surface::new("table", [0.0, 0.0], [0.6, 0.4], 0.75, 0.7),
        Surface::new("big-shelf", [3.0, 0.0], [0.4, 0.25], 1.0, 0.6),
        Surface::new("small-shelf", [0.0, 3.0], [0.35, 0.2], 0.9, 0.6),
    ]
}

/// Robot at `robot`, human parked far away, objects as `(name, surface, x, y)`.
pub fn world(robot: [f64; 2], objects: &[(&str, &str, f64, f64)]) -> GeometricState<f64> {
    let mut x = GeometricState::new(
        surfaces(),
        Pose2::new(robot[0], robot[1], 0.0),
        HumanConfig::standing([-20.0, -20.0]),
    )
    .unwrap();
    for (n, s, px, py) in objects {
        x.add_object(n, s, [*px, *py]).unwrap();
    }
    x
}

pub fn transfer(object: &str, from: &str, to: &str) -> Vec<GroundedAction> {
    vec![
        act("move", &[from]),
        act("pick", &[object, from]),
        act("move", &[to]),
        act("place", &[object, to]),
    ]
}

pub fn skeleton(actions: Vec<GroundedAction>) -> Skeleton {
    Skeleton::new(actions, &PhaseDurations::default())
}

pub mod oracle {
    use dynlgp::kinematics::Pose2;
    use dynlgp::trajopt::{evaluate, NlpProblem, SparseRow};

    fn dense(rows: &[SparseRow<f64>], n: usize) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                let mut d = vec![0.0; n];
                for &(j, v) in r {
                    d[j] += v;
                }
                d
            })
            .collect()
    }

    fn flat(w: &[Pose2<f64>]) -> Vec<f64> {
        w.iter().flat_map(|p| [p.x, p.y, p.phi]).collect()
    }

    fn poses(z: &[f64]) -> Vec<Pose2<f64>> {
        z.chunks(3).map(|c| Pose2::new(c[0], c[1], c[2])).collect()
    }

    /// Largest relative deviation between analytic derivatives and central
    /// differences, over the objective gradient and every constraint row.
    pub fn jacobian_error(p: &NlpProblem<f64>, w: &[Pose2<f64>]) -> f64 {
        let z = flat(w);
        let n = z.len();
        let e = evaluate(p, w).unwrap();
        let eq = dense(&e.eq_jacobian, n);
        let ineq = dense(&e.ineq_jacobian, n);
        let h = 1e-6;
        let mut fd_grad = vec![0.0; n];
        let mut fd_eq = vec![vec![0.0; n]; e.eq.len()];
        let mut fd_ineq = vec![vec![0.0; n]; e.ineq.len()];
        for j in 0..n {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += h;
            zm[j] -= h;
            let ep = evaluate(p, &poses(&zp)).unwrap();
            let em = evaluate(p, &poses(&zm)).unwrap();
            fd_grad[j] = (ep.objective - em.objective) / (2.0 * h);
            for (i, row) in fd_eq.iter_mut().enumerate() {
                row[j] = (ep.eq[i] - em.eq[i]) / (2.0 * h);
            }
            for (i, row) in fd_ineq.iter_mut().enumerate() {
                row[j] = (ep.ineq[i] - em.ineq[i]) / (2.0 * h);
            }
        }
        let rel = |a: &[f64], f: &[f64]| {
            let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            a.iter().zip(f).fold(0.0f64, |m, (x, y)| m.max((x - y).abs() / scale))
        };
        let mut worst = rel(&e.gradient, &fd_grad);
        for (a, f) in eq.iter().zip(&fd_eq).chain(ineq.iter().zip(&fd_ineq)) {
            worst = worst.max(rel(a, f));
        }
        worst
    }
}

pub mod random {
    use dynlgp::kinematics::Pose2;
    use dynlgp::trajopt::{Anchor, Constraint, ConstraintKind, NlpParams, NlpProblem, Tag};
    use rand::Rng;

    /// Random waypoint NLP with every constraint kind, plus a random point.
    pub fn problem<R: Rng>(rng: &mut R) -> (NlpProblem<f64>, Vec<Pose2<f64>>) {
        let steps = rng.gen_range(3..25);
        let pose = |rng: &mut R| {
            Pose2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-0.4..0.4))
        };
        let start = pose(rng);
        let prev = rng.gen_bool(0.5).then(|| pose(rng));
        let waypoints: Vec<_> = (0..steps).map(|_| pose(rng)).collect();
        let mut constraints = Vec::new();
        for _ in 0..rng.gen_range(1..12) {
            let c = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let kind = match rng.gen_range(0..4) {
                0 => ConstraintKind::Reach { target: c },
                1 => ConstraintKind::Clearance { center: c, radius: 0.5 },
                2 => ConstraintKind::Within { center: c, radius: 0.6 },
                _ => ConstraintKind::Inside { lo: c, hi: [c[0] + 0.5, c[1] + 0.3] },
            };
            constraints.push(Constraint {
                step: rng.gen_range(0..steps),
                anchor: if rng.gen_bool(0.5) { Anchor::Base } else { Anchor::Gripper },
                kind,
                tag: Tag::Location,
            });
        }
        constraints.sort_by_key(|c| c.step);
        let params = NlpParams {
            w_v: rng.gen_range(0.5..2.0),
            w_a: rng.gen_range(1.0..20.0),
            ..NlpParams::default()
        };
        let p = NlpProblem {
            start,
            prev,
            steps,
            params,
            gripper_offset: [rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)],
            constraints,
            phases: Vec::new(),
        };
        (p, waypoints)
    }
}

pub mod fixtures {
    use dynlgp::prediction::{Mdp, MdpSpec};
    use std::path::PathBuf;

    pub fn path(rel: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
    }

    pub fn mdp(name: &str) -> Mdp {
        let text = std::fs::read_to_string(path(&format!("mdp/{name}.json"))).unwrap();
        let spec: MdpSpec = serde_json::from_str(&text).unwrap();
        Mdp::new(spec).unwrap()
    }
}

pub mod bfs {
    use std::collections::{BTreeSet, HashMap, VecDeque};

    use dynlgp::pddl::{Atom, GroundedAction};
    use dynlgp::symbolic::SymbolicState;
    use rand::seq::SliceRandom;
    use rand::Rng;

    type State = BTreeSet<Atom>;

    fn step(s: &State, a: &GroundedAction) -> Option<State> {
        if !a.pre_pos.iter().all(|p| s.contains(p)) || a.pre_neg.iter().any(|p| s.contains(p)) {
            return None;
        }
        let mut n: State = s.iter().filter(|p| !a.del.contains(*p)).cloned().collect();
        n.extend(a.add.iter().cloned());
        Some(n)
    }

    fn done(s: &State, goal: &State) -> bool {
        goal.iter().all(|g| s.contains(g))
    }

    /// Every shortest action sequence to `goal`, by plain breadth-first
    /// layering. `None` when the goal is unreachable.
    pub fn tie_set(s0: &State, goal: &State, actions: &[GroundedAction]) -> Option<BTreeSet<Vec<String>>> {
        let mut dist: HashMap<State, usize> = HashMap::from([(s0.clone(), 0)]);
        let mut queue = VecDeque::from([s0.clone()]);
        let mut best = None;
        while let Some(s) = queue.pop_front() {
            let d = dist[&s];
            if best.is_some_and(|b| d >= b) {
                continue;
            }
            if done(&s, goal) {
                best = Some(d);
                continue;
            }
            for a in actions {
                if let Some(n) = step(&s, a) {
                    if !dist.contains_key(&n) {
                        dist.insert(n.clone(), d + 1);
                        if done(&n, goal) {
                            best.get_or_insert(d + 1);
                        }
                        queue.push_back(n);
                    }
                }
            }
        }
        let best = best?;
        let mut reach: HashMap<State, bool> = HashMap::new();
        let mut out = BTreeSet::new();
        let mut path = Vec::new();
        collect(s0, 0, best, goal, actions, &dist, &mut reach, &mut path, &mut out);
        Some(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn collect(
        s: &State,
        depth: usize,
        best: usize,
        goal: &State,
        actions: &[GroundedAction],
        dist: &HashMap<State, usize>,
        reach: &mut HashMap<State, bool>,
        path: &mut Vec<String>,
        out: &mut BTreeSet<Vec<String>>,
    ) -> bool {
        if depth == best {
            let ok = done(s, goal);
            if ok {
                out.insert(path.clone());
            }
            return ok;
        }
        if reach.get(s) == Some(&false) {
            return false;
        }
        let mut any = false;
        for a in actions {
            let Some(n) = step(s, a) else { continue };
            if dist.get(&n) != Some(&(depth + 1)) {
                continue;
            }
            path.push(a.to_string());
            any |= collect(&n, depth + 1, best, goal, actions, dist, reach, path, out);
            path.pop();
        }
        reach.insert(s.clone(), any);
        any
    }

    /// Up to 4 objects on 3 locations, optionally one held by the human.
    pub fn random_instance<R: Rng>(rng: &mut R) -> (SymbolicState, State) {
        let locations = ["table", "small-shelf", "big-shelf"];
        let objects = ["cup-red", "cup-green", "cup-blue", "plate-pink", "plate-blue", "jug", "bowl"];
        let n = rng.gen_range(1..=4);
        let chosen: Vec<&str> = objects.choose_multiple(rng, n).copied().collect();
        let mut s = SymbolicState::new();
        s.insert(Atom::new("agent-free", &[]));
        if rng.gen_bool(0.8) {
            s.insert(Atom::new("agent-at", &[locations.choose(rng).unwrap()]));
        }
        for (i, o) in chosen.iter().enumerate() {
            if i == 0 && rng.gen_bool(0.15) {
                s.insert(Atom::new("human-carry", &[o]));
            } else {
                s.insert(Atom::new("on", &[o, locations.choose(rng).unwrap()]));
            }
        }
        let k = rng.gen_range(1..=n);
        let goal = chosen[..k]
            .iter()
            .map(|o| Atom::new("on", &[o, locations.choose(rng).unwrap()]))
            .collect();
        (s, goal)
    }
}

pub mod differential {
    use dynlgp::kinematics::{apply_switch, deduce_state, Pose2};
    use dynlgp::pddl::ground_actions;
    use dynlgp::symbolic::{applicable, exec};
    use rand::seq::SliceRandom;
    use rand::Rng;

    /// Random walks of symbolically applicable actions. Before each switch the
    /// robot is moved where execution would leave it. Returns the number of
    /// applications and of mismatches between `deduce ∘ apply_switch` and `exec`.
    pub fn walk<R: Rng>(rng: &mut R, applications: usize) -> (usize, usize) {
        let d = super::domain();
        let actions = ground_actions(&d);
        let (mut count, mut bad) = (0, 0);
        while count < applications {
            let names = ["cup-red", "cup-green", "plate-blue", "jug"];
            let mut objs = Vec::new();
            for (i, o) in names.iter().enumerate().take(rng.gen_range(1..=4)) {
                let s = *["table", "small-shelf", "big-shelf"].choose(rng).unwrap();
                let c = super::surfaces().into_iter().find(|x| x.name == s).unwrap().center;
                let xy = [c[0] - 0.2 + 0.15 * i as f64, c[1] + rng.gen_range(-0.1..0.1)];
                objs.push((*o, s, xy[0], xy[1]));
            }
            let mut x = super::world([0.0, -1.0], &objs);
            for _ in 0..10 {
                let s = deduce_state(&x, &d);
                let legal: Vec<_> = actions
                    .iter()
                    .filter(|a| applicable(&s, a))
                    .filter(|a| a.name == "move" || x.is_object(a.args[0].as_str()))
                    .collect();
                let a = *legal.choose(rng).unwrap();
                let l = a.args.last().unwrap().as_str();
                let surface = x.surface(l).unwrap().clone();
                let target = match a.name.as_str() {
                    "move" => surface.center,
                    "pick" => x.object_world(&a.args[0]).unwrap().xy(),
                    _ => {
                        let others: Vec<[f64; 2]> = x.occupied(l, &[]);
                        surface.closest_free_point(surface.center, &others, 0.15, 0.05).unwrap()
                    }
                };
                x.set_robot(Pose2::new(target[0], target[1], rng.gen_range(-3.0..3.0)));
                let before = deduce_state(&x, &d);
                let want = exec(&before, a).unwrap();
                let got = deduce_state(&apply_switch(&x, a).unwrap(), &d);
                count += 1;
                if got != want {
                    bad += 1;
                }
                x = apply_switch(&x, a).unwrap();
            }
        }
        (count, bad)
    }
}

pub mod irl {
    use dynlgp::prediction::{scripted_demo, Demonstration, IrlModel, Mdp};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub fn demos(mdp: &Mdp, n: usize, seed: u64) -> Vec<Demonstration> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| scripted_demo(mdp, &mdp.start, &mut rng).unwrap()).collect()
    }

    /// Equal numbers of demonstrations fetching from each side.
    pub fn symmetric_demos(mdp: &Mdp) -> Vec<Demonstration> {
        let side = |l: &str| {
            let acts: Vec<_> = [format!("go-to {l}"), "pick-up cup".into(), "go-to home".into(), "place".into()]
                .iter()
                .map(|t| mdp.parse_action(t).unwrap())
                .collect();
            Demonstration::replay(mdp, &mdp.start, &acts).unwrap()
        };
        (0..5).flat_map(|_| [side("left"), side("right")]).collect()
    }

    fn phi(mdp: &Mdp, s: usize) -> Vec<f64> {
        let mut v = vec![0.0; mdp.feature_dim()];
        for i in mdp.features(&mdp.states[s]) {
            v[i] += 1.0;
        }
        v
    }

    /// Mean discounted feature counts of the demonstrations, goal state included.
    pub fn empirical(mdp: &Mdp, demos: &[Demonstration], discount: f64) -> Vec<f64> {
        let mut mu = vec![0.0; mdp.feature_dim()];
        for d in demos {
            for (t, &s) in d.states.iter().enumerate() {
                for (m, f) in mu.iter_mut().zip(phi(mdp, s)) {
                    *m += discount.powi(t as i32) * f / demos.len() as f64;
                }
            }
        }
        mu
    }

    /// Expected counts by the backward recursion μ(s) = φ(s) + γ Σ π(a|s) μ(s'),
    /// iterated to a fixed point and averaged over the demonstration starts.
    pub fn expected(model: &IrlModel, demos: &[Demonstration]) -> Vec<f64> {
        let mdp = &model.mdp;
        let n = mdp.states.len();
        let base: Vec<Vec<f64>> = (0..n).map(|s| phi(mdp, s)).collect();
        let mut mu = base.clone();
        for _ in 0..2000 {
            let mut next = base.clone();
            for s in 0..n {
                if mdp.terminal[s] {
                    continue;
                }
                for (a, nx) in mdp.next[s].iter().enumerate() {
                    let (Some(j), p) = (nx, model.policy[s][a]) else { continue };
                    if p == 0.0 {
                        continue;
                    }
                    for (x, y) in next[s].iter_mut().zip(&mu[*j]) {
                        *x += model.discount * p * y;
                    }
                }
            }
            let delta = next
                .iter()
                .zip(&mu)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0f64, f64::max);
            mu = next;
            if delta < 1e-12 {
                break;
            }
        }
        let mut out = vec![0.0; mdp.feature_dim()];
        for d in demos {
            for (o, m) in out.iter_mut().zip(&mu[d.states[0]]) {
                *o += m / demos.len() as f64;
            }
        }
        out
    }

    /// Max-norm feature expectation gap, recomputed independently.
    pub fn gap(model: &IrlModel, demos: &[Demonstration]) -> f64 {
        empirical(&model.mdp, demos, model.discount)
            .iter()
            .zip(expected(model, demos))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub mod nlp {
    use super::{act, transfer, world};
    use dynlgp::kinematics::{GeometricState, Pose2};
    use dynlgp::symbolic::{PhaseDurations, Skeleton};
    use dynlgp::trajopt::{Anchor, Constraint, ConstraintKind, NlpParams, NlpProblem, Phase, Tag};

    pub fn line_problem(target: [f64; 2], steps: usize) -> NlpProblem<f64> {
        NlpProblem {
            start: Pose2::new(0.0, 0.0, 0.0),
            prev: None,
            steps,
            params: NlpParams::default(),
            gripper_offset: [0.0, 0.0],
            constraints: vec![Constraint {
                step: steps - 1,
                anchor: Anchor::Base,
                kind: ConstraintKind::Reach { target },
                tag: Tag::Grasp,
            }],
            phases: vec![Phase { action: act("move", &["table"]), first: 0, len: steps, keyframe: target }],
        }
    }

    pub fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = [b[0] - a[0], b[1] - a[1]];
        let l2 = d[0] * d[0] + d[1] * d[1];
        let s = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0);
        ((p[0] - a[0] - s * d[0]).powi(2) + (p[1] - a[1] - s * d[1]).powi(2)).sqrt()
    }

    pub fn long_skeleton(move_steps: usize) -> (GeometricState<f64>, Skeleton) {
        let x = world(
            [1.5, 1.5],
            &[
                ("cup-green", "big-shelf", 2.85, 0.05),
                ("cup-red", "big-shelf", 3.15, -0.05),
                ("plate-blue", "small-shelf", -0.15, 3.0),
                ("plate-red", "small-shelf", 0.15, 3.05),
            ],
        );
        let mut actions = Vec::new();
        actions.extend(transfer("cup-green", "big-shelf", "table"));
        actions.extend(transfer("plate-blue", "small-shelf", "table"));
        actions.extend(transfer("cup-red", "big-shelf", "table"));
        actions.extend(transfer("plate-red", "small-shelf", "table"));
        let mut durations = PhaseDurations::default();
        durations.by_action.insert("move".into(), move_steps);
        (x, Skeleton::new(actions, &durations))
    }
}
