//! Scalar abstraction for the numeric modules.
//!
//! Geometry, trajectory optimization and the low-level motion generator are
//! written against [`Real`] so they run in `f32` or `f64`. The planner and the
//! experiment harness fix the scalar to `f64` through the aliases in the crate
//! root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly
    /// rounded) in both supported types, so this never fails.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Wraps an angle into `(-pi, pi]`.
    fn wrap_angle(self) -> Self {
        let two_pi = Self::TAU();
        let mut a = self % two_pi;
        if a > Self::PI() {
            a -= two_pi;
        } else if a <= -Self::PI() {
            a += two_pi;
        }
        a
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let a = k as f64 * 0.7;
            let w = a.wrap_angle();
            assert!(w > -std::f64::consts::PI - 1e-12 && w <= std::f64::consts::PI + 1e-12);
            assert!(((a - w) / std::f64::consts::TAU).fract().abs() < 1e-9
                || (((a - w) / std::f64::consts::TAU).fract().abs() - 1.0).abs() < 1e-9);
        }
        assert_eq!(3.0f32.wrap_angle(), 3.0);
    }
}
