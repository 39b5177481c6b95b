use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{
    load_scenario, GeometrySpec, HumanMode, HumanSpec, ObjectSpec, Scenario, ScenarioFile, SurfaceSpec,
    SCHEMA_VERSION,
};
use super::HarnessError;
use crate::kinematics::{dist2, GeometricState, HumanConfig, Pose2, Surface};
use crate::lgp::Mode;
use crate::pddl::{parse_domain, SET_TABLE_DOMAIN};
use crate::prediction::{
    compose_actions, high_level_state, scripted_demo, ClassSpec, ComposeConfig, GoalTerm, Mdp, MdpSpec, StartSpec,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub scenarios: usize,
    pub objects: usize,
    pub seed: u64,
    /// Degradation fraction written into each scenario.
    pub fraction: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { scenarios: 20, objects: 4, seed: 0, fraction: 0.3 }
    }
}

const TARGET: &str = "table";
const SHELVES: [&str; 2] = ["small-shelf", "big-shelf"];
/// Minimum spacing of generated objects on a shelf.
const SPACING: f64 = 0.18;

fn surfaces() -> Vec<SurfaceSpec> {
    let s = |name: &str, center, half_extents, height| SurfaceSpec {
        name: name.into(),
        center,
        half_extents,
        height,
        radius: 0.7,
    };
    vec![
        s("table", [0.0, 0.0], [0.6, 0.4], 0.75),
        s("small-shelf", [-0.5, 3.0], [0.4, 0.25], 0.9),
        s("big-shelf", [3.0, 0.5], [0.4, 0.3], 1.0),
    ]
}

fn sample_xy(rng: &mut ChaCha8Rng, s: &SurfaceSpec, taken: &[[f64; 2]]) -> Option<[f64; 2]> {
    let m = 0.08;
    for _ in 0..1000 {
        let p = [
            s.center[0] + rng.gen_range(-(s.half_extents[0] - m)..=(s.half_extents[0] - m)),
            s.center[1] + rng.gen_range(-(s.half_extents[1] - m)..=(s.half_extents[1] - m)),
        ];
        if taken.iter().all(|q| dist2(p, *q).sqrt() >= SPACING) {
            return Some(p);
        }
    }
    None
}

/// Writes `cfg.scenarios` scenarios into `dir`: objects start on the shelves and
/// must all reach the table. Each scenario's human is a scripted solo solution
/// of the whole task, replayed with a degraded copy as prediction.
pub fn generate_suite(cfg: &SuiteConfig, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let domain = parse_domain(SET_TABLE_DOMAIN)?;
    let all_objects = domain.constants_of("object");
    if cfg.objects == 0 || cfg.objects > all_objects.len() {
        return Err(HarnessError::Inconsistent(format!("cannot place {} objects", cfg.objects)));
    }
    let mut paths = Vec::new();
    for i in 0..cfg.scenarios {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
        let name = format!("synthetic_{i:02}");
        let surfaces = surfaces();
        let mut names: Vec<&str> = all_objects.choose_multiple(&mut rng, cfg.objects).copied().collect();
        names.sort_unstable();
        let mut objects = Vec::new();
        let mut taken: BTreeMap<&str, Vec<[f64; 2]>> = BTreeMap::new();
        for o in &names {
            let shelf = *SHELVES.choose(&mut rng).expect("nonempty");
            let spec = surfaces.iter().find(|s| s.name == shelf).expect("declared shelf");
            let on = taken.entry(shelf).or_default();
            let xy = sample_xy(&mut rng, spec, on)
                .ok_or_else(|| HarnessError::Inconsistent(format!("no room on {shelf}")))?;
            on.push(xy);
            objects.push(ObjectSpec { name: o.to_string(), surface: shelf.into(), xy });
        }
        let robot = [rng.gen_range(-0.5..0.5), -1.2, 0.0];
        let human = [rng.gen_range(0.8..1.6), rng.gen_range(1.2..1.8)];
        let geometry = GeometrySpec { surfaces, objects, robot, human };

        let problem = problem_text(&name, &geometry);
        let problem_file = format!("{name}.pddl");
        std::fs::write(dir.join(&problem_file), problem)?;

        let workspace = build_workspace(&geometry)?;
        let mdp = Mdp::new(task_mdp(&geometry))?;
        let s0 = high_level_state(&mdp, &workspace)?;
        let demo = scripted_demo(&mdp, &s0, &mut rng)?;
        let solo = compose_actions(&mdp, &demo.actions, &workspace, &ComposeConfig::default())?;
        let csv_file = format!("{name}_human.csv");
        let obj_names: Vec<String> = geometry.objects.iter().map(|o| o.name.clone()).collect();
        solo.trajectory
            .write_csv(std::fs::File::create(dir.join(&csv_file))?, &obj_names)?;

        let file = ScenarioFile {
            version: SCHEMA_VERSION,
            name: name.clone(),
            domain: None,
            problem: problem_file,
            geometry,
            human: HumanSpec {
                mode: HumanMode::Degraded,
                trajectory: Some(csv_file),
                model: None,
                fraction: cfg.fraction,
                seed: 0,
            },
            mode: Mode::Dynamic,
            trigger_period: 10,
            timeout: None,
        };
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&file)?)?;
        paths.push(path);
    }
    Ok(paths)
}

fn problem_text(name: &str, g: &GeometrySpec) -> String {
    let init: Vec<String> = g.objects.iter().map(|o| format!("    (on {} {})", o.name, o.surface)).collect();
    let goal: Vec<String> = g.objects.iter().map(|o| format!("      (on {} {TARGET})", o.name)).collect();
    format!(
        "(define (problem {name})\n  (:domain set_table)\n  (:init\n    (agent-free)\n{}\n  )\n  (:goal (and\n{}\n  ))\n)\n",
        init.join("\n"),
        goal.join("\n")
    )
}

fn build_workspace(g: &GeometrySpec) -> Result<GeometricState<f64>, HarnessError> {
    let surfaces = g
        .surfaces
        .iter()
        .map(|s| Surface::new(&s.name, s.center, s.half_extents, s.height, s.radius))
        .collect();
    let mut x = GeometricState::new(
        surfaces,
        Pose2::new(g.robot[0], g.robot[1], g.robot[2]),
        HumanConfig::standing(g.human),
    )?;
    for o in &g.objects {
        x.add_object(&o.name, &o.surface, o.xy)?;
    }
    Ok(x)
}

/// One class per object so the solo human's choices name concrete objects.
fn task_mdp(g: &GeometrySpec) -> MdpSpec {
    let locations: Vec<String> = g.surfaces.iter().map(|s| s.name.clone()).collect();
    let classes = g
        .objects
        .iter()
        .map(|o| ClassSpec {
            name: o.name.clone(),
            locations: locations.clone(),
            objects: vec![o.name.clone()],
        })
        .collect();
    let counts = g
        .objects
        .iter()
        .map(|o| (o.name.clone(), BTreeMap::from([(o.surface.clone(), 1)])))
        .collect();
    let goal = vec![g
        .objects
        .iter()
        .map(|o| GoalTerm { class: o.name.clone(), location: TARGET.into(), min: 1 })
        .collect()];
    MdpSpec {
        locations,
        classes,
        start: StartSpec { human: TARGET.into(), carry: None, counts },
        goal,
    }
}

/// Loads every `*.json` scenario in `dir`, sorted by file name.
pub fn load_suite(dir: &Path) -> Result<Vec<Scenario>, HarnessError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_scenario(p)).collect()
}
