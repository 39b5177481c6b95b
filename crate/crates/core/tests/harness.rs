mod common;

use std::collections::BTreeSet;
use std::path::Path;

use common::fixtures;
use dynlgp::harness::*;
use dynlgp::lgp::Mode;
use serde_json::Value;

fn scenario(name: &str) -> Scenario {
    load_scenario(&fixtures::path(&format!("scenarios/{name}.json"))).unwrap()
}

/// Writes a mutated copy of `one_object` into `dir` and loads it.
fn load_mutated(dir: &Path, edit: impl FnOnce(&mut Value)) -> Result<Scenario, HarnessError> {
    std::fs::copy(fixtures::path("scenarios/one_object.pddl"), dir.join("one_object.pddl")).unwrap();
    let text = std::fs::read_to_string(fixtures::path("scenarios/one_object.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    edit(&mut v);
    let path = dir.join("mutated.json");
    std::fs::write(&path, v.to_string()).unwrap();
    load_scenario(&path)
}

#[test]
fn seven_object_fixture_loads() {
    let s = scenario("set_table_7obj");
    assert_eq!(s.object_names().len(), 7);
    assert_eq!(s.workspace.surfaces().len(), 3);
    assert_eq!(s.goal().len(), 7);
    assert!(matches!(s.human, HumanBase::Trajectory(_)));
}

#[test]
fn undeclared_object_is_a_dangling_reference() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_mutated(dir.path(), |v| v["geometry"]["objects"][0]["name"] = "cup-black".into()).unwrap_err();
    assert!(matches!(err, HarnessError::DanglingReference { ref name, .. } if name == "cup-black"), "{err}");
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_mutated(dir.path(), |v| v["geometry"]["robot"] = "here".into()).unwrap_err();
    match err {
        HarnessError::Schema { path, .. } => assert!(path.contains("geometry.robot"), "{path}"),
        e => panic!("unexpected {e}"),
    }
    let err = load_mutated(dir.path(), |v| v["extra"] = 1.into()).unwrap_err();
    assert!(matches!(err, HarnessError::Schema { .. }), "{err}");
    let err = load_mutated(dir.path(), |v| v["version"] = 2.into()).unwrap_err();
    assert!(matches!(err, HarnessError::Schema { .. }), "{err}");
}

#[test]
fn misplaced_object_is_inconsistent() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_mutated(dir.path(), |v| {
        v["geometry"]["objects"][0]["surface"] = "table".into();
        v["geometry"]["objects"][0]["xy"] = serde_json::json!([0.0, 0.0]);
    })
    .unwrap_err();
    assert!(matches!(err, HarnessError::Inconsistent(_)), "{err}");
}

#[test]
fn one_object_smoke() {
    let runs = run_scenario(&scenario("one_object"), 0, &[Mode::Single, Mode::Dynamic]);
    assert_eq!(runs.len(), 2);
    for r in &runs {
        assert!(r.record.success, "{:?}: {}", r.record.mode, r.record.failure);
        assert_eq!(r.record.robot_moved, "cup-green");
        assert_eq!(r.record.human_moved, "");
        assert_eq!(r.record.replan_count, 0);
    }
    assert_eq!(runs[0].record.path_ratio, Some(1.0));
}

#[test]
fn task_iou_matches_set_definition() {
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let cases: [(&[&str], &[&str], f64); 5] = [
        (&[], &[], 0.0),
        (&["a"], &[], 0.0),
        (&["a", "b"], &["c"], 0.0),
        (&["a", "b"], &["b", "c"], 1.0 / 3.0),
        (&["a"], &["a"], 1.0),
    ];
    for (h, r, want) in cases {
        assert_eq!(task_iou(&set(h), &set(r)), want, "{h:?} {r:?}");
    }
}

#[test]
fn aggregate_uses_sample_deviation() {
    let a = aggregate(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!((a.n, a.mean), (4, 2.5));
    assert!((a.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert_eq!(aggregate(&[7.0]).std, 0.0);
    assert!(aggregate(&[]).mean.is_nan());
}

#[test]
fn seeds_file_formats() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("seeds");
    std::fs::write(&p, "[3, 1, 4]").unwrap();
    assert_eq!(read_seeds(&p).unwrap(), [3, 1, 4]);
    std::fs::write(&p, "3 1\n4,1").unwrap();
    assert_eq!(read_seeds(&p).unwrap(), [3, 1, 4, 1]);
    std::fs::write(&p, "3 x").unwrap();
    assert!(matches!(read_seeds(&p), Err(HarnessError::Seeds(_))));
}

#[test]
fn empty_table_has_no_report() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit_report(&MetricsTable::default(), dir.path()), Err(HarnessError::EmptyTable)));
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn report_files_agree_with_runs() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    let paths = generate_suite(&SuiteConfig { scenarios: 1, ..SuiteConfig::default() }, &suite).unwrap();
    let scenarios = vec![scenario("one_object"), scenario("set_table_7obj"), load_scenario(&paths[0]).unwrap()];
    let table = run_batch(&scenarios, &BatchConfig::with_seeds(vec![0, 1]));
    assert_eq!(table.runs.len(), 12);
    let out = dir.path().join("nested/report");
    emit_report(&table, &out).unwrap();
    for f in REPORT_FILES {
        assert!(out.join(f).is_file(), "{f} missing");
    }

    let records = read_runs_csv(std::fs::File::open(out.join("runs.csv")).unwrap()).unwrap();
    assert_eq!(records, table.records());

    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"], 12);
    for m in summary["modes"].as_array().unwrap() {
        let mode: Mode = serde_json::from_value(m["mode"].clone()).unwrap();
        let rows: Vec<&RunRecord> = records.iter().filter(|r| r.mode == mode).collect();
        assert_eq!(m["runs"], rows.len());
        assert_eq!(m["successes"], rows.iter().filter(|r| r.success).count());
        let check = |key: &str, values: Vec<f64>| {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let got = &m["metrics"][key];
            assert_eq!(got["n"], values.len(), "{key}");
            assert!((got["mean"].as_f64().unwrap() - mean).abs() < 1e-12, "{key} mean");
            assert!((got["std"].as_f64().unwrap() - var.sqrt()).abs() < 1e-12, "{key} std");
        };
        check("steps", rows.iter().map(|r| r.steps as f64).collect());
        check("replan_count", rows.iter().map(|r| r.replan_count as f64).collect());
        check("robot_path_length", rows.iter().map(|r| r.robot_path_length).collect());
        check("task_iou", rows.iter().map(|r| r.task_iou).collect());
        check("path_ratio", rows.iter().filter_map(|r| r.path_ratio).collect());
        if mode == Mode::Single {
            assert_eq!(m["metrics"]["path_ratio"]["mean"], 1.0);
            assert_eq!(m["metrics"]["path_ratio"]["std"], 0.0);
        }
    }

    let planned: usize = table
        .runs
        .iter()
        .filter_map(|r| r.report.as_ref())
        .flat_map(|r| &r.triggers)
        .filter(|t| matches!(t.outcome, dynlgp::lgp::TriggerOutcome::Replanned | dynlgp::lgp::TriggerOutcome::Refined))
        .count();
    for f in &REPORT_FILES[2..] {
        let rows = csv_rows(&out.join(f));
        let total: usize = rows.iter().map(|r| r[2].parse::<usize>().unwrap()).sum();
        assert_eq!(total, planned, "{f}");
    }
    let lens: BTreeSet<usize> = csv_rows(&out.join(REPORT_FILES[2])).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(lens.contains(&4));
    assert!(lens.contains(&16), "{lens:?}");
}

#[test]
fn hierarchical_repeats_fan_out_seeds() {
    use dynlgp::prediction::SourceMode;
    let s = scenario("set_table_3obj");
    let sources: Vec<_> = (0..5).map(|seed| s.human_source(seed).unwrap()).collect();
    for (seed, src) in sources.iter().enumerate() {
        assert_eq!(src.mode, SourceMode::Hierarchical { seed: seed as u64 });
        assert!(!src.actual.is_empty());
    }
    let distinct: Vec<_> = sources.iter().map(|s| &s.actual).fold(Vec::new(), |mut acc, t| {
        if !acc.contains(&t) {
            acc.push(t);
        }
        acc
    });
    assert!(distinct.len() >= 2, "policy sampling never varied");
    assert_eq!(s.human_source(3).unwrap(), sources[3]);
}

#[test]
fn suite_generation_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = SuiteConfig { scenarios: 3, ..SuiteConfig::default() };
    let pa = generate_suite(&cfg, a.path()).unwrap();
    generate_suite(&cfg, b.path()).unwrap();
    assert_eq!(pa.len(), 3);
    for e in std::fs::read_dir(a.path()).unwrap() {
        let name = e.unwrap().file_name();
        assert_eq!(std::fs::read(a.path().join(&name)).unwrap(), std::fs::read(b.path().join(&name)).unwrap());
    }
    let loaded = load_suite(a.path()).unwrap();
    assert_eq!(loaded.len(), 3);
    for s in &loaded {
        assert_eq!(s.object_names().len(), cfg.objects);
    }
}
