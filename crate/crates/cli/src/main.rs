use std::fs::File;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dynlgp::harness::{
    emit_report, generate_suite, load_scenario, load_suite, read_seeds, run_batch, run_scenario, write_runs_csv,
    BatchConfig, HumanBase, SuiteConfig,
};
use dynlgp::lgp::{write_trajectory_csv, Mode};
use dynlgp::prediction::{
    compose_prediction, high_level_state, irl_fit, ComposeConfig, DemoFile, Demonstration, IrlConfig, Mdp, MdpSpec,
};

/// Environment variable holding the log filter, e.g. `info` or `dynlgp=debug`.
const LOG_ENV: &str = "DYNLGP_LOG";

#[derive(Parser)]
#[command(name = "dynlgp", version, about = "Dynamic LGP task and motion planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Single,
    Dynamic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Single => Mode::Single,
            ModeArg::Dynamic => Mode::Dynamic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write report.json, trajectory.csv and runs.csv.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        /// Defaults to the scenario's mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Defaults to the scenario's human seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every scenario in a directory in both modes and write the report files.
    Batch {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Seeds as a JSON array or whitespace separated list; defaults to 0..repeats.
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate the synthetic scenario suite.
    Suite {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        objects: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        fraction: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a MaxEnt IRL model to demonstrations.
    IrlTrain {
        #[arg(long)]
        mdp: PathBuf,
        #[arg(long)]
        demos: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compose a hierarchical prediction for a scenario's workspace.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    match Cli::parse().command {
        Command::Plan { scenario, mode, seed, out } => {
            let sc = load_scenario(&scenario)?;
            let mode = mode.map(Mode::from).unwrap_or(sc.file.mode);
            let seed = seed.unwrap_or(sc.file.human.seed);
            let runs = run_scenario(&sc, seed, &[mode]);
            let run = &runs[0];
            std::fs::create_dir_all(&out)?;
            write_runs_csv(&[run.record.clone()], File::create(out.join("runs.csv"))?)?;
            if let Some(report) = &run.report {
                std::fs::write(out.join("report.json"), serde_json::to_string_pretty(report)?)?;
                write_trajectory_csv(report, File::create(out.join("trajectory.csv"))?)?;
            }
            let r = &run.record;
            println!(
                "{} {:?}: success={} steps={} replans={} path={:.3}",
                r.scenario, r.mode, r.success, r.steps, r.replan_count, r.robot_path_length
            );
            if !r.failure.is_empty() {
                println!("failure: {}", r.failure);
            }
        }
        Command::Batch { suite, repeats, seeds, out } => {
            let scenarios = load_suite(&suite)?;
            if scenarios.is_empty() {
                bail!("no scenarios in {}", suite.display());
            }
            let seeds = match seeds {
                Some(f) => {
                    let s = read_seeds(&f)?;
                    if s.len() < repeats {
                        bail!("{} seeds given, {repeats} repeats requested", s.len());
                    }
                    s[..repeats].to_vec()
                }
                None => (0..repeats as u64).collect(),
            };
            let table = run_batch(&scenarios, &BatchConfig::with_seeds(seeds));
            emit_report(&table, &out)?;
            for m in [Mode::Single, Mode::Dynamic] {
                let n = table.mode(m).count();
                let ok = table.mode(m).filter(|r| r.record.success).count();
                println!("{m:?}: {ok}/{n} succeeded");
            }
        }
        Command::Suite { count, objects, seed, fraction, out } => {
            let cfg = SuiteConfig { scenarios: count, objects, seed, fraction };
            let paths = generate_suite(&cfg, &out)?;
            println!("wrote {} scenarios to {}", paths.len(), out.display());
        }
        Command::IrlTrain { mdp, demos, out } => {
            let mdp = Mdp::new(read_json::<MdpSpec>(&mdp)?)?;
            let file: DemoFile = read_json(&demos)?;
            let demos = file
                .demos
                .iter()
                .map(|d| Demonstration::from_spec(&mdp, d))
                .collect::<Result<Vec<_>, _>>()?;
            let model = irl_fit(&demos, &mdp, &IrlConfig::default())?;
            std::fs::write(&out, serde_json::to_string_pretty(&model.to_file())?)?;
            println!(
                "{} states, {} iterations, gap {:.3e}, converged {}",
                model.mdp.states.len(),
                model.iterations,
                model.gap,
                model.converged
            );
        }
        Command::Predict { model, scenario, seed, out } => {
            let model = dynlgp::prediction::IrlModel::from_file(read_json(&model)?)?;
            let sc = load_scenario(&scenario)?;
            if let HumanBase::Model(_) = sc.human {
                log::debug!("scenario carries its own model; using --model");
            }
            let s0 = high_level_state(&model.mdp, &sc.workspace)?;
            let p = compose_prediction(&model, &s0, &sc.workspace, seed, &ComposeConfig::default())?;
            p.trajectory.write_csv(File::create(&out)?, &sc.object_names())?;
            let actions: Vec<String> = p.actions.iter().map(|a| model.mdp.format_action(*a)).collect();
            println!("{} samples: {}", p.trajectory.len(), actions.join(", "));
        }
    }
    Ok(())
}
