use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::kinematics::{GeometricState, HumanConfig, Pose2, Surface};
use crate::lgp::{LgpConfig, LgpInstance, Mode};
use crate::pddl::{parse_domain, parse_problem, Atom, Domain, Problem, SET_TABLE_DOMAIN};
use crate::prediction::{
    compose_prediction, high_level_state, ComposeConfig, HumanSample, HumanSource, HumanTrajectory, IrlModel,
    IrlModelFile,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub name: String,
    pub center: [f64; 2],
    pub half_extents: [f64; 2],
    pub height: f64,
    /// Radius of the `agent-at` disc around the center.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub name: String,
    pub surface: String,
    pub xy: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub surfaces: Vec<SurfaceSpec>,
    pub objects: Vec<ObjectSpec>,
    /// Robot base pose `[x, y, φ]`.
    pub robot: [f64; 3],
    /// Human pelvis position.
    pub human: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HumanMode {
    /// The human stands still at the geometry position.
    None,
    Replay,
    Degraded,
    Hierarchical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanSpec {
    pub mode: HumanMode,
    /// Ground-truth CSV for replay and degraded modes.
    #[serde(default)]
    pub trajectory: Option<String>,
    /// IRL model JSON for hierarchical mode.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_fraction() -> f64 {
    0.3
}

fn default_trigger() -> usize {
    10
}

fn default_mode() -> Mode {
    Mode::Dynamic
}

/// On-disk scenario. Paths are relative to the scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub name: String,
    /// PDDL domain; the bundled set-table domain when absent.
    #[serde(default)]
    pub domain: Option<String>,
    pub problem: String,
    pub geometry: GeometrySpec,
    pub human: HumanSpec,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_trigger")]
    pub trigger_period: usize,
    #[serde(default)]
    pub timeout: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum HumanBase {
    Parked(HumanConfig<f64>),
    Trajectory(HumanTrajectory),
    Model(Box<IrlModel>),
}

/// A fully resolved scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub path: PathBuf,
    pub domain: Domain,
    pub problem: Problem,
    pub workspace: GeometricState<f64>,
    pub human: HumanBase,
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|_| HarnessError::DanglingReference {
        field: "file".into(),
        name: path.display().to_string(),
    })
}

fn resolve(base: &Path, rel: &str, field: &str) -> Result<PathBuf, HarnessError> {
    let p = base.join(rel);
    if p.exists() {
        Ok(p)
    } else {
        Err(HarnessError::DanglingReference {
            field: field.into(),
            name: p.display().to_string(),
        })
    }
}

/// Parses scenario JSON, reporting the field path on schema violations.
pub fn parse_scenario_file(text: &str) -> Result<ScenarioFile, HarnessError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| HarnessError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if file.version != SCHEMA_VERSION {
        return Err(HarnessError::Schema {
            path: "version".into(),
            message: format!("unsupported version {}, expected {SCHEMA_VERSION}", file.version),
        });
    }
    if file.trigger_period == 0 {
        return Err(HarnessError::Schema {
            path: "trigger_period".into(),
            message: "must be at least 1".into(),
        });
    }
    Ok(file)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let file = parse_scenario_file(&read(path)?)?;
    let base = path.parent().unwrap_or(Path::new("."));
    Scenario::resolve(file, base, path)
}

impl Scenario {
    pub fn resolve(file: ScenarioFile, base: &Path, path: &Path) -> Result<Self, HarnessError> {
        let domain_text = match &file.domain {
            Some(d) => read(&resolve(base, d, "domain")?)?,
            None => SET_TABLE_DOMAIN.to_string(),
        };
        let domain = parse_domain(&domain_text)?;
        let problem = parse_problem(&read(&resolve(base, &file.problem, "problem")?)?, &domain)?;

        let g = &file.geometry;
        let dangling = |field: String, name: &str| HarnessError::DanglingReference { field, name: name.to_string() };
        for (i, s) in g.surfaces.iter().enumerate() {
            if domain.constant_type(&s.name) != Some("location") {
                return Err(dangling(format!("geometry.surfaces[{i}].name"), &s.name));
            }
        }
        for (i, o) in g.objects.iter().enumerate() {
            if domain.constant_type(&o.name) != Some("object") {
                return Err(dangling(format!("geometry.objects[{i}].name"), &o.name));
            }
            if !g.surfaces.iter().any(|s| s.name == o.surface) {
                return Err(dangling(format!("geometry.objects[{i}].surface"), &o.surface));
            }
        }
        let surfaces = g
            .surfaces
            .iter()
            .map(|s| Surface::new(&s.name, s.center, s.half_extents, s.height, s.radius))
            .collect();
        let mut workspace = GeometricState::new(
            surfaces,
            Pose2::new(g.robot[0], g.robot[1], g.robot[2]),
            HumanConfig::standing(g.human),
        )?;
        for o in &g.objects {
            workspace.add_object(&o.name, &o.surface, o.xy)?;
        }
        // Problem facts about objects must match the geometry.
        for atom in problem.init.iter().filter(|a| a.predicate == "on") {
            let (obj, loc) = (&atom.args[0], &atom.args[1]);
            match g.objects.iter().find(|o| &o.name == obj) {
                Some(o) if &o.surface == loc => {}
                Some(_) => {
                    return Err(HarnessError::Inconsistent(format!("{atom} disagrees with the geometry")));
                }
                None => return Err(dangling("problem.init".into(), obj)),
            }
        }
        for atom in &problem.goal {
            for a in &atom.args {
                if domain.constant_type(a) == Some("object") && !g.objects.iter().any(|o| &o.name == a) {
                    return Err(dangling("problem.goal".into(), a));
                }
            }
        }

        let objects: Vec<String> = g.objects.iter().map(|o| o.name.clone()).collect();
        let human = match file.human.mode {
            HumanMode::None => HumanBase::Parked(HumanConfig::standing(g.human)),
            HumanMode::Replay | HumanMode::Degraded => {
                let rel = file.human.trajectory.as_deref().ok_or_else(|| HarnessError::Schema {
                    path: "human.trajectory".into(),
                    message: "required for replay and degraded modes".into(),
                })?;
                let f = std::fs::File::open(resolve(base, rel, "human.trajectory")?)?;
                HumanBase::Trajectory(HumanTrajectory::read_csv(f, &objects)?)
            }
            HumanMode::Hierarchical => {
                let rel = file.human.model.as_deref().ok_or_else(|| HarnessError::Schema {
                    path: "human.model".into(),
                    message: "required for hierarchical mode".into(),
                })?;
                let text = read(&resolve(base, rel, "human.model")?)?;
                let mf: IrlModelFile = serde_json::from_str(&text).map_err(|e| HarnessError::Schema {
                    path: "human.model".into(),
                    message: e.to_string(),
                })?;
                let model = IrlModel::from_file(mf)?;
                for c in &model.mdp.classes {
                    for o in &c.objects {
                        if !objects.contains(o) {
                            return Err(dangling("human.model".into(), o));
                        }
                    }
                }
                HumanBase::Model(Box::new(model))
            }
        };
        Ok(Scenario {
            file,
            path: path.to_path_buf(),
            domain,
            problem,
            workspace,
            human,
        })
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn goal(&self) -> &std::collections::BTreeSet<Atom> {
        &self.problem.goal
    }

    pub fn object_names(&self) -> Vec<String> {
        self.file.geometry.objects.iter().map(|o| o.name.clone()).collect()
    }

    pub fn instance(&self) -> Result<LgpInstance, HarnessError> {
        let config = LgpConfig {
            trigger_period: self.file.trigger_period,
            timeout: self.file.timeout,
            ..LgpConfig::default()
        };
        Ok(LgpInstance::new(self.domain.clone(), self.problem.goal.clone(), config)?)
    }

    /// Human source for `seed` (the degradation window or rollout seed).
    pub fn human_source(&self, seed: u64) -> Result<HumanSource, HarnessError> {
        Ok(match &self.human {
            HumanBase::Parked(h) => HumanSource::replay(HumanTrajectory {
                samples: vec![HumanSample { config: *h, carried: None }],
            }),
            HumanBase::Trajectory(t) => match self.file.human.mode {
                HumanMode::Degraded => HumanSource::degraded(t.clone(), self.file.human.fraction, seed)?,
                _ => HumanSource::replay(t.clone()),
            },
            HumanBase::Model(m) => {
                let s0 = high_level_state(&m.mdp, &self.workspace)?;
                let p = compose_prediction(m, &s0, &self.workspace, seed, &ComposeConfig::default())?;
                let mut src = HumanSource::hierarchical(&p, seed);
                if src.actual.is_empty() {
                    src = HumanSource::replay(HumanTrajectory {
                        samples: vec![HumanSample { config: self.workspace.human(), carried: None }],
                    });
                }
                src
            }
        })
    }
}

/// Steps the human needs to finish alone: the last human event, or `None` without events.
pub fn human_alone_steps(source: &HumanSource) -> Option<usize> {
    source.actual.events().last().map(|e| e.t)
}
