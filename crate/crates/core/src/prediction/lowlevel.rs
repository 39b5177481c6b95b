use serde::{Deserialize, Serialize};

use crate::kinematics::HumanConfig;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    /// Walk: pelvis moves to the goal xy, hand returns to rest above it.
    Pelvis,
    /// Reach: hand moves to the goal, pelvis static.
    Hand,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionLimits<T> {
    /// Peak speed, m/s.
    pub v_max: T,
    /// Sample period, s.
    pub dt: T,
    /// Hand height when walking.
    pub rest_height: T,
}

impl<T: Real> Default for MotionLimits<T> {
    fn default() -> Self {
        MotionLimits {
            v_max: T::lit(2.0),
            dt: T::lit(0.1),
            rest_height: T::lit(1.0),
        }
    }
}

/// Rest-to-rest minimum-acceleration profile on `[0, 1]`.
pub fn min_accel_profile<T: Real>(s: T) -> T {
    s * s * (T::lit(3.0) - T::lit(2.0) * s)
}

/// Smallest duration ≥ `requested` whose peak step stays within `v_max·dt`.
pub fn segment_duration<T: Real>(distance: T, requested: usize, limits: &MotionLimits<T>) -> usize {
    let step = limits.v_max * limits.dt;
    let need = (T::lit(1.5) * distance / step).ceil().as_f64().max(0.0) as usize;
    requested.max(need).max(2)
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, x| a + *x * *x).sqrt()
}

/// Goal-conditioned segment from `h_now` to `goal`; the last sample attains the goal exactly.
///
/// The first returned sample is one step after `h_now`. The duration grows
/// beyond `duration` when needed to respect `limits.v_max`.
pub fn generate_lowlevel<T: Real>(
    h_now: &HumanConfig<T>,
    goal: [T; 3],
    kind: SegmentKind,
    duration: usize,
    limits: &MotionLimits<T>,
) -> Vec<HumanConfig<T>> {
    let (pelvis_goal, hand_goal) = match kind {
        SegmentKind::Pelvis => ([goal[0], goal[1]], [goal[0], goal[1], limits.rest_height]),
        SegmentKind::Hand => (h_now.pelvis, goal),
    };
    let dp = [pelvis_goal[0] - h_now.pelvis[0], pelvis_goal[1] - h_now.pelvis[1]];
    let dh = [
        hand_goal[0] - h_now.hand[0],
        hand_goal[1] - h_now.hand[1],
        hand_goal[2] - h_now.hand[2],
    ];
    let dist = norm(&dp).max(norm(&dh));
    let n = segment_duration(dist, duration, limits);
    let mut out = Vec::with_capacity(n);
    for k in 1..n {
        let a = min_accel_profile(T::lit(k as f64) / T::lit(n as f64));
        out.push(HumanConfig::new(
            [h_now.pelvis[0] + a * dp[0], h_now.pelvis[1] + a * dp[1]],
            [h_now.hand[0] + a * dh[0], h_now.hand[1] + a * dh[1], h_now.hand[2] + a * dh[2]],
        ));
    }
    out.push(HumanConfig::new(pelvis_goal, hand_goal));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn at_goal_is_constant() {
        let h = HumanConfig::standing([1.0, 2.0]);
        let seg = generate_lowlevel(&h, [1.0, 2.0, 1.0], SegmentKind::Pelvis, 7, &MotionLimits::default());
        assert_eq!(seg.len(), 7);
        assert!(seg.iter().all(|s| *s == h));
    }

    #[test]
    fn walk_is_monotone_and_exact() {
        let lim = MotionLimits::<f64>::default();
        let seg = generate_lowlevel(&HumanConfig::standing([0.0, 0.0]), [3.0, 0.0, 0.0], SegmentKind::Pelvis, 30, &lim);
        assert_eq!(seg.len(), 30);
        assert_eq!(seg.last().unwrap().pelvis, [3.0, 0.0]);
        let mut prev = 0.0;
        for s in &seg {
            assert!(s.pelvis[0] >= prev);
            assert!(s.pelvis[0] - prev <= 0.2 + 1e-12);
            prev = s.pelvis[0];
        }
    }

    #[test]
    fn long_walk_is_stretched() {
        let lim = MotionLimits::<f32>::default();
        let seg = generate_lowlevel(&HumanConfig::standing([0.0, 0.0]), [10.0, 0.0, 0.0], SegmentKind::Pelvis, 10, &lim);
        assert!(seg.len() >= 75);
        let mut prev = 0.0f32;
        for s in &seg {
            assert!(s.pelvis[0] - prev <= 0.2 + 1e-5);
            prev = s.pelvis[0];
        }
    }

    #[test]
    fn reach_keeps_pelvis() {
        let h = HumanConfig::standing([0.0, -0.7]);
        let seg = generate_lowlevel(&h, [0.1, -0.3, 0.75], SegmentKind::Hand, 5, &MotionLimits::default());
        assert_eq!(seg.len(), 5);
        assert!(seg.iter().all(|s| s.pelvis == h.pelvis));
        assert_eq!(seg[4].hand, [0.1, -0.3, 0.75]);
    }
}
