//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the verdicts are always printed.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::nlp::{line_problem, long_skeleton, segment_distance};
use common::{bfs, differential, domain, fixtures, irl, oracle, random};
use dynlgp::harness::{generate_suite, load_scenario, load_suite, run_batch, run_scenario, write_runs_csv};
use dynlgp::harness::{BatchConfig, MetricsTable, SuiteConfig};
use dynlgp::kinematics::HumanConfig;
use dynlgp::lgp::{LgpConfig, Mode};
use dynlgp::pddl::ground_actions;
use dynlgp::prediction::{irl_fit, rollout_policy, IrlConfig, ROLLOUT_CAP};
use dynlgp::symbolic::{search_skeletons, SearchConfig, SearchError, SearchOutcome};
use dynlgp::trajopt::{build_nlp, evaluate, solve, NlpParams, SolverConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn symbolic_oracle() -> Verdict {
    let actions = ground_actions(&domain());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t0 = Instant::now();
    let mut mismatches = 0;
    let mut reachable = 0;
    for _ in 0..50 {
        let (s0, goal) = bfs::random_instance(&mut rng);
        let oracle = bfs::tie_set(s0.atoms(), &goal, &actions);
        let agree = match (search_skeletons(&s0, &goal, &actions, &SearchConfig::default()), &oracle) {
            (Ok(SearchOutcome::AlreadySatisfied), Some(o)) => *o == BTreeSet::from([vec![]]),
            (Ok(out), Some(o)) => {
                reachable += 1;
                let got: BTreeSet<Vec<String>> = out
                    .skeletons()
                    .iter()
                    .map(|s| s.actions.iter().map(|a| a.to_string()).collect())
                    .collect();
                got == *o
            }
            (Err(SearchError::Unreachable | SearchError::DepthBoundExceeded(_)), None) => true,
            _ => false,
        };
        mismatches += usize::from(!agree);
    }
    let secs = t0.elapsed().as_secs_f64();
    check(
        mismatches == 0 && secs < 10.0,
        format!("50 instances ({reachable} reachable), {mismatches} tie-set mismatches, {secs:.2} s"),
    )
}

fn symbolic_time() -> Verdict {
    let s = load_scenario(&fixtures::path("scenarios/set_table_7obj.json")).map_err(|e| e.to_string())?;
    let run = &run_scenario(&s, 0, &[Mode::Dynamic])[0];
    let times = run.report.as_ref().ok_or("no report")?.symbolic_times();
    let mean = run.symbolic_time().ok_or("no replans")?;
    check(mean <= 0.5, format!("mean {mean:.3} s over {} replans", times.len()))
}

fn nlp_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_jac = 0.0f64;
    let (mut converged, mut bad_certificates) = (0, 0);
    for _ in 0..100 {
        let (p, w) = random::problem(&mut rng);
        worst_jac = worst_jac.max(oracle::jacobian_error(&p, &w));
        let sol = solve(&p, &SolverConfig::default(), None).map_err(|e| e.to_string())?;
        if sol.converged {
            converged += 1;
            let e = evaluate(&p, &sol.waypoints).map_err(|e| e.to_string())?;
            if !(e.max_eq() < 1e-3 && e.max_ineq_violation() <= 0.0) {
                bad_certificates += 1;
            }
        }
    }
    let mut worst_line = 0.0f64;
    for _ in 0..20 {
        use rand::Rng;
        let target = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let sol = solve(&line_problem(target, rng.gen_range(10..40)), &SolverConfig::default(), None)
            .map_err(|e| e.to_string())?;
        if !sol.converged {
            return Err(format!("free move to {target:?} did not converge"));
        }
        for w in &sol.waypoints {
            worst_line = worst_line.max(segment_distance(w.xy(), [0.0, 0.0], target));
        }
    }
    check(
        worst_jac <= 1e-4 && bad_certificates == 0 && worst_line < 1e-6,
        format!(
            "jacobian rel err {worst_jac:.1e}, {converged}/100 converged with {bad_certificates} bad residuals, \
             collinearity {worst_line:.1e} m"
        ),
    )
}

fn nlp_scale() -> Verdict {
    let (x, sk) = long_skeleton(50);
    let human: Vec<_> = (0..500)
        .map(|t| HumanConfig::standing([1.5 + (t as f64 * 0.02).sin(), -1.0]))
        .collect();
    let p = build_nlp(&sk, &x, &human, 0, &NlpParams::default()).map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let sol = solve(&p, &SolverConfig::default(), None).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    check(
        sk.len() == 16 && sol.converged && secs < 60.0,
        format!("{} actions, {} waypoints, converged {} in {secs:.2} s", sk.len(), p.steps, sol.converged),
    )
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn dominance(table: &MetricsTable) -> Verdict {
    let rate = |m| {
        let n = table.mode(m).count();
        table.mode(m).filter(|r| r.record.success).count() as f64 / n as f64
    };
    let (single, dynamic) = (rate(Mode::Single), rate(Mode::Dynamic));
    let ratios: Vec<f64> = table.mode(Mode::Dynamic).filter_map(|r| r.record.path_ratio).collect();
    let replans: Vec<f64> = table.mode(Mode::Dynamic).map(|r| r.record.replan_count as f64).collect();
    let (ratio, replan) = (mean(&ratios), mean(&replans));
    check(
        dynamic >= single && ratio < 0.9 && (1.0..=10.0).contains(&replan),
        format!(
            "success dynamic {dynamic:.2} vs single {single:.2}, path ratio {ratio:.3} over {} runs, replans {replan:.2}",
            ratios.len()
        ),
    )
}

fn safety(table: &MetricsTable, r_safe: f64) -> Verdict {
    let (mut steps, mut violations) = (0, 0);
    for r in table.runs.iter().filter_map(|r| r.report.as_ref()) {
        for s in &r.trajectory {
            steps += 1;
            let d = ((s.robot.x - s.human[0]).powi(2) + (s.robot.y - s.human[1]).powi(2)).sqrt();
            violations += usize::from(d < r_safe - 1e-3);
        }
    }
    check(violations == 0, format!("{violations} violations over {steps} executed steps"))
}

fn differential_consistency() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, bad) = differential::walk(&mut rng, 200);
    check(n == 200 && bad == 0, format!("{bad} violations over {n} applications"))
}

fn irl_criterion() -> Verdict {
    let mut worst = 0.0f64;
    for name in ["tiny", "symmetric", "set_table_3obj", "set_table_4obj", "set_table_person"] {
        let mdp = fixtures::mdp(name);
        let demos = if name == "symmetric" { irl::symmetric_demos(&mdp) } else { irl::demos(&mdp, 20, 7) };
        let model = irl_fit(&demos, &mdp, &IrlConfig::default()).map_err(|e| e.to_string())?;
        if !model.converged {
            return Err(format!("{name} did not converge"));
        }
        worst = worst.max(irl::gap(&model, &demos));
    }
    let mdp = fixtures::mdp("set_table_person");
    let model = irl_fit(&irl::demos(&mdp, 20, 7), &mdp, &IrlConfig::default()).map_err(|e| e.to_string())?;
    let goal = |s: &_| model.mdp.is_goal(s);
    let reached = (0..100)
        .filter(|&seed| rollout_policy(&model, &model.mdp.start, &goal, seed, ROLLOUT_CAP).is_ok())
        .count();
    let sym = fixtures::mdp("symmetric");
    let sym_model = irl_fit(&irl::symmetric_demos(&sym), &sym, &IrlConfig::default()).map_err(|e| e.to_string())?;
    let first = sym_model.action_distribution(&sym_model.mdp.start).map_err(|e| e.to_string())?;
    let p = |t: &str| {
        let a = sym_model.mdp.parse_action(t).unwrap();
        first.iter().find(|(b, _)| *b == a).map_or(0.0, |(_, p)| *p)
    };
    let asym = (p("go-to left") - p("go-to right")).abs();
    check(
        worst < 1e-2 && reached >= 80 && asym <= 0.05,
        format!("max gap {worst:.3e}, person rollouts {reached}/100, symmetric |Δp| {asym:.3}"),
    )
}

fn hierarchical_end_to_end() -> Verdict {
    let s = load_scenario(&fixtures::path("scenarios/set_table_3obj.json")).map_err(|e| e.to_string())?;
    let objects: BTreeSet<String> = s.goal().iter().map(|a| a.args[0].clone()).collect();
    let (mut ok, mut bad_union) = (0, 0);
    for seed in 0..5 {
        let r = &run_scenario(&s, seed, &[Mode::Dynamic])[0].record;
        if r.success {
            ok += 1;
            let moved: BTreeSet<String> = r
                .robot_moved
                .split(';')
                .chain(r.human_moved.split(';'))
                .filter(|o| !o.is_empty())
                .map(str::to_string)
                .collect();
            bad_union += usize::from(moved != objects);
        }
    }
    check(ok >= 4 && bad_union == 0, format!("{ok}/5 succeeded, {bad_union} with wrong object union"))
}

fn runs_csv(table: &MetricsTable) -> Vec<u8> {
    let mut buf = Vec::new();
    write_runs_csv(&table.records(), &mut buf).unwrap();
    buf
}

fn reproducibility(suite: &Path, first: &MetricsTable, cfg: &BatchConfig) -> Verdict {
    let scenarios = load_suite(suite).map_err(|e| e.to_string())?;
    let second = run_batch(&scenarios, cfg);
    let (a, b) = (runs_csv(first), runs_csv(&second));
    check(a == b, format!("runs.csv {} bytes, identical {}", a.len(), a == b))
}

fn run(id: usize, name: &str, results: &mut Vec<bool>, f: impl FnOnce() -> Verdict) {
    let t0 = Instant::now();
    let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = t0.elapsed().as_secs_f64();
    match &verdict {
        Ok(d) => println!("criterion {id:>2} PASS  {name}: {d} [{secs:.1} s]"),
        Err(d) => println!("criterion {id:>2} FAIL  {name}: {d} [{secs:.1} s]"),
    }
    results.push(verdict.is_ok());
}

fn main() {
    let mut results = Vec::new();
    run(1, "symbolic oracle equivalence", &mut results, symbolic_oracle);
    run(2, "symbolic plan time", &mut results, symbolic_time);
    run(3, "NLP correctness", &mut results, nlp_correctness);
    run(4, "NLP scale", &mut results, nlp_scale);

    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = BatchConfig::with_seeds((0..5).collect());
    let table = generate_suite(&SuiteConfig::default(), dir.path())
        .and_then(|_| load_suite(dir.path()))
        .map(|scenarios| {
            let t0 = Instant::now();
            let t = run_batch(&scenarios, &cfg);
            println!("synthetic suite: {} runs in {:.1} s", t.runs.len(), t0.elapsed().as_secs_f64());
            t
        });
    let r_safe = LgpConfig::default().nlp.r_safe;
    match &table {
        Ok(t) => {
            run(5, "dynamic dominance trend", &mut results, || dominance(t));
            run(6, "safety invariant", &mut results, || safety(t, r_safe));
        }
        Err(e) => {
            for (id, name) in [(5, "dynamic dominance trend"), (6, "safety invariant")] {
                run(id, name, &mut results, || Err(format!("suite setup failed: {e}")));
            }
        }
    }
    run(7, "differential consistency", &mut results, differential_consistency);
    run(8, "IRL", &mut results, irl_criterion);
    run(9, "hierarchical end-to-end", &mut results, hierarchical_end_to_end);
    run(10, "reproducibility", &mut results, || match &table {
        Ok(t) => reproducibility(dir.path(), t, &cfg),
        Err(e) => Err(format!("suite setup failed: {e}")),
    });

    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
