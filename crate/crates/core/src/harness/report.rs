use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use super::batch::{aggregate, summarize, MetricsTable, ModeSummary, RunRecord};
use super::HarnessError;
use crate::lgp::{Mode, TriggerOutcome, TriggerRecord};

pub const REPORT_FILES: [&str; 5] = [
    "summary.json",
    "runs.csv",
    "time_over_skeleton_length.csv",
    "time_over_task_progress.csv",
    "skeleton_length_over_progress.csv",
];

#[derive(Serialize)]
struct Summary<'a> {
    runs: usize,
    scenarios: Vec<&'a str>,
    seeds: Vec<u64>,
    modes: Vec<ModeSummary>,
}

pub fn write_runs_csv<W: Write>(records: &[RunRecord], w: W) -> Result<(), HarnessError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_runs_csv<R: Read>(r: R) -> Result<Vec<RunRecord>, HarnessError> {
    let mut rd = csv::Reader::from_reader(r);
    Ok(rd.deserialize().collect::<Result<_, _>>()?)
}

fn planned(table: &MetricsTable) -> impl Iterator<Item = (Mode, &TriggerRecord)> {
    table.runs.iter().filter_map(|r| r.report.as_ref()).flat_map(|rep| {
        rep.triggers
            .iter()
            .filter(|t| matches!(t.outcome, TriggerOutcome::Replanned | TriggerOutcome::Refined))
            .map(move |t| (rep.mode, t))
    })
}

fn progress_bin(p: f64) -> usize {
    ((p * 10.0 + 1e-9).floor() as usize).min(10)
}

fn write_buckets(
    path: &Path,
    key: &str,
    value: &str,
    rows: BTreeMap<(Mode, usize), Vec<f64>>,
    key_fmt: impl Fn(usize) -> String,
) -> Result<(), HarnessError> {
    let mut wr = csv::Writer::from_path(path)?;
    wr.write_record(["mode", key, "count", &format!("mean_{value}"), &format!("std_{value}")])?;
    for ((mode, k), v) in rows {
        let a = aggregate(&v);
        let mode = match mode {
            Mode::Single => "single",
            Mode::Dynamic => "dynamic",
        };
        wr.write_record([mode.to_string(), key_fmt(k), a.n.to_string(), a.mean.to_string(), a.std.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes the five report files into `dir`, creating it if needed.
pub fn emit_report(table: &MetricsTable, dir: &Path) -> Result<(), HarnessError> {
    if table.runs.is_empty() {
        return Err(HarnessError::EmptyTable);
    }
    std::fs::create_dir_all(dir)?;

    let mut scenarios: Vec<&str> = Vec::new();
    let mut seeds: Vec<u64> = Vec::new();
    for r in &table.runs {
        if !scenarios.contains(&r.record.scenario.as_str()) {
            scenarios.push(&r.record.scenario);
        }
        if !seeds.contains(&r.record.seed) {
            seeds.push(r.record.seed);
        }
    }
    let mut modes = Vec::new();
    for m in [Mode::Single, Mode::Dynamic] {
        if table.mode(m).next().is_some() {
            modes.push(summarize(table, m));
        }
    }
    let summary = Summary { runs: table.runs.len(), scenarios, seeds, modes };
    std::fs::write(dir.join(REPORT_FILES[0]), serde_json::to_string_pretty(&summary)?)?;

    write_runs_csv(&table.records(), std::fs::File::create(dir.join(REPORT_FILES[1]))?)?;

    let mut by_len: BTreeMap<(Mode, usize), Vec<f64>> = BTreeMap::new();
    let mut time_by_progress: BTreeMap<(Mode, usize), Vec<f64>> = BTreeMap::new();
    let mut len_by_progress: BTreeMap<(Mode, usize), Vec<f64>> = BTreeMap::new();
    for (mode, t) in planned(table) {
        let time = t.symbolic_time + t.nlp_time;
        let bin = progress_bin(t.progress);
        by_len.entry((mode, t.skeleton_len)).or_default().push(time);
        time_by_progress.entry((mode, bin)).or_default().push(time);
        len_by_progress.entry((mode, bin)).or_default().push(t.skeleton_len as f64);
    }
    let bin_fmt = |b: usize| format!("{:.1}", b as f64 / 10.0);
    write_buckets(&dir.join(REPORT_FILES[2]), "skeleton_len", "time", by_len, |k| k.to_string())?;
    write_buckets(&dir.join(REPORT_FILES[3]), "progress", "time", time_by_progress, bin_fmt)?;
    write_buckets(&dir.join(REPORT_FILES[4]), "progress", "skeleton_len", len_by_progress, bin_fmt)?;
    Ok(())
}
