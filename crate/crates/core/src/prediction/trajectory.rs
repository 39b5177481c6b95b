use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lowlevel::min_accel_profile;
use super::PredictionError;
use crate::kinematics::HumanConfig;

/// Human configuration and carried object at one 10 Hz step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanSample {
    pub config: HumanConfig<f64>,
    pub carried: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Pick,
    Place,
}

/// A symbolic change caused by the human at step `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanEvent {
    pub t: usize,
    pub kind: EventKind,
    pub object: String,
}

/// Sampled human motion; sample `k` is the configuration at step `k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HumanTrajectory {
    pub samples: Vec<HumanSample>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    t: usize,
    pelvis_x: f64,
    pelvis_y: f64,
    hand_x: f64,
    hand_y: f64,
    hand_z: f64,
    carried: i64,
}

impl HumanTrajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Configuration at step `t`, holding the last sample afterwards.
    pub fn at(&self, t: usize) -> Option<&HumanSample> {
        self.samples.get(t.min(self.samples.len().saturating_sub(1)))
    }

    /// Configurations from step `t` on, at least one entry when nonempty.
    pub fn configs_from(&self, t: usize) -> Vec<HumanConfig<f64>> {
        if self.samples.is_empty() {
            return Vec::new();
        }
        let start = t.min(self.samples.len() - 1);
        self.samples[start..].iter().map(|s| s.config).collect()
    }

    /// Pick/place events from changes in the carried column.
    pub fn events(&self) -> Vec<HumanEvent> {
        let mut out = Vec::new();
        let mut prev: Option<&String> = None;
        for (t, s) in self.samples.iter().enumerate() {
            let cur = s.carried.as_ref();
            if cur != prev {
                if let Some(o) = prev {
                    out.push(HumanEvent { t, kind: EventKind::Place, object: o.clone() });
                }
                if let Some(o) = cur {
                    out.push(HumanEvent { t, kind: EventKind::Pick, object: o.clone() });
                }
            }
            prev = cur;
        }
        out
    }

    /// Largest pelvis or hand displacement between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| {
                let (a, b) = (&w[0].config, &w[1].config);
                let dp = ((a.pelvis[0] - b.pelvis[0]).powi(2) + (a.pelvis[1] - b.pelvis[1]).powi(2)).sqrt();
                let dh = (0..3).map(|i| (a.hand[i] - b.hand[i]).powi(2)).sum::<f64>().sqrt();
                dp.max(dh)
            })
            .fold(0.0, f64::max)
    }

    /// Writes `t,pelvis_x,pelvis_y,hand_x,hand_y,hand_z,carried`; carried is an index into `objects` or −1.
    pub fn write_csv<W: Write>(&self, w: W, objects: &[String]) -> Result<(), PredictionError> {
        let mut wr = csv::Writer::from_writer(w);
        for (t, s) in self.samples.iter().enumerate() {
            let carried = match &s.carried {
                Some(o) => objects
                    .iter()
                    .position(|x| x == o)
                    .ok_or_else(|| PredictionError::UnknownName(format!("object `{o}`")))? as i64,
                None => -1,
            };
            wr.serialize(CsvRow {
                t,
                pelvis_x: s.config.pelvis[0],
                pelvis_y: s.config.pelvis[1],
                hand_x: s.config.hand[0],
                hand_y: s.config.hand[1],
                hand_z: s.config.hand[2],
                carried,
            })?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, objects: &[String]) -> Result<Self, PredictionError> {
        let mut rd = csv::Reader::from_reader(r);
        let mut samples = Vec::new();
        for (k, row) in rd.deserialize::<CsvRow>().enumerate() {
            let row = row?;
            if row.t != k {
                return Err(PredictionError::Csv(format!("row {k}: expected t = {k}, got {}", row.t)));
            }
            let carried = match row.carried {
                -1 => None,
                i if i >= 0 && (i as usize) < objects.len() => Some(objects[i as usize].clone()),
                i => return Err(PredictionError::Csv(format!("row {k}: carried id {i} out of range"))),
            };
            samples.push(HumanSample {
                config: HumanConfig::new([row.pelvis_x, row.pelvis_y], [row.hand_x, row.hand_y, row.hand_z]),
                carried,
            });
        }
        Ok(HumanTrajectory { samples })
    }
}

/// Removed window of a degraded trajectory, `[start, start + len)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegradeWindow {
    pub start: usize,
    pub len: usize,
}

/// Replaces one seeded contiguous window of `⌊fraction·T⌋` samples by a
/// smooth bridge between its neighbors. Carried labels are kept.
pub fn degrade_ground_truth(
    traj: &HumanTrajectory,
    fraction: f64,
    seed: u64,
) -> Result<(HumanTrajectory, Option<DegradeWindow>), PredictionError> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(PredictionError::InvalidFraction(fraction));
    }
    let n = traj.len();
    let w = (fraction * n as f64).floor() as usize;
    if w == 0 || n < w + 2 {
        return Ok((traj.clone(), None));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.gen_range(1..=n - w - 1);
    let a = traj.samples[start - 1].config;
    let b = traj.samples[start + w].config;
    let mut out = traj.clone();
    for k in 0..w {
        let s = min_accel_profile((k + 1) as f64 / (w + 1) as f64);
        let lerp = |x: f64, y: f64| x + s * (y - x);
        out.samples[start + k].config = HumanConfig::new(
            [lerp(a.pelvis[0], b.pelvis[0]), lerp(a.pelvis[1], b.pelvis[1])],
            [lerp(a.hand[0], b.hand[0]), lerp(a.hand[1], b.hand[1]), lerp(a.hand[2], b.hand[2])],
        );
    }
    Ok((out, Some(DegradeWindow { start, len: w })))
}
