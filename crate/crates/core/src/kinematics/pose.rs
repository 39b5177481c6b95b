use serde::{Deserialize, Serialize};

use crate::Real;

/// Planar rigid transform: translation `(x, y)` and heading `phi` in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose2<T> {
    pub x: T,
    pub y: T,
    pub phi: T,
}

impl<T: Real> Pose2<T> {
    pub fn new(x: T, y: T, phi: T) -> Self {
        Pose2 { x, y, phi }
    }

    pub fn identity() -> Self {
        Pose2::new(T::zero(), T::zero(), T::zero())
    }

    pub fn xy(&self) -> [T; 2] {
        [self.x, self.y]
    }

    /// `self * other`: applies `other` in the frame of `self`.
    pub fn compose(&self, other: &Pose2<T>) -> Pose2<T> {
        let [x, y] = self.transform_point([other.x, other.y]);
        Pose2::new(x, y, (self.phi + other.phi).wrap_angle())
    }

    pub fn inverse(&self) -> Pose2<T> {
        let (s, c) = self.phi.sin_cos();
        Pose2::new(
            -(c * self.x + s * self.y),
            s * self.x - c * self.y,
            (-self.phi).wrap_angle(),
        )
    }

    pub fn transform_point(&self, p: [T; 2]) -> [T; 2] {
        let (s, c) = self.phi.sin_cos();
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }
}

/// Planar pose plus a height offset. Heights add along the chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Placement<T> {
    pub pose: Pose2<T>,
    pub z: T,
}

impl<T: Real> Placement<T> {
    pub fn new(x: T, y: T, phi: T, z: T) -> Self {
        Placement {
            pose: Pose2::new(x, y, phi),
            z,
        }
    }

    pub fn planar(pose: Pose2<T>) -> Self {
        Placement { pose, z: T::zero() }
    }

    pub fn identity() -> Self {
        Placement::planar(Pose2::identity())
    }

    pub fn compose(&self, local: &Placement<T>) -> Placement<T> {
        Placement {
            pose: self.pose.compose(&local.pose),
            z: self.z + local.z,
        }
    }

    pub fn inverse(&self) -> Placement<T> {
        Placement {
            pose: self.pose.inverse(),
            z: -self.z,
        }
    }

    pub fn xy(&self) -> [T; 2] {
        self.pose.xy()
    }

    pub fn xyz(&self) -> [T; 3] {
        [self.pose.x, self.pose.y, self.z]
    }
}

pub fn dist2<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
