use serde::{Deserialize, Serialize};

use super::pose::{dist2, Placement, Pose2};
use super::surface::Surface;
use super::tree::{JointKind, KinematicTree};
use super::{KinematicsError, GRIPPER, HAND, HUMAN, ROBOT};
use crate::Real;

/// Human as pelvis point plus hand point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HumanConfig<T> {
    pub pelvis: [T; 2],
    pub hand: [T; 3],
}

impl<T: Real> HumanConfig<T> {
    pub fn new(pelvis: [T; 2], hand: [T; 3]) -> Self {
        HumanConfig { pelvis, hand }
    }

    /// Standing at `pelvis` with the hand at rest beside it.
    pub fn standing(pelvis: [T; 2]) -> Self {
        HumanConfig {
            pelvis,
            hand: [pelvis[0], pelvis[1], T::lit(1.0)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams<T> {
    /// Max gripper-object distance for a robot pick.
    pub grasp_tolerance: T,
    /// Max hand-object distance for a human pick.
    pub human_grasp_tolerance: T,
    /// Slack for releasing an object at the surface boundary.
    pub place_tolerance: T,
}

impl<T: Real> Default for GeometryParams<T> {
    fn default() -> Self {
        GeometryParams {
            grasp_tolerance: T::lit(0.05),
            human_grasp_tolerance: T::lit(0.15),
            place_tolerance: T::lit(1e-6),
        }
    }
}

/// Who currently holds an object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Holder {
    Surface(String),
    Robot,
    Human,
}

/// Robot, human and object configuration on fixed surfaces, as a kinematic tree.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricState<T> {
    pub tree: KinematicTree<T>,
    surfaces: Vec<Surface<T>>,
    objects: Vec<String>,
    /// Step index at 10 Hz.
    pub t: usize,
    pub params: GeometryParams<T>,
}

impl<T: Real> GeometricState<T> {
    pub fn new(
        surfaces: Vec<Surface<T>>,
        robot: Pose2<T>,
        human: HumanConfig<T>,
    ) -> Result<Self, KinematicsError> {
        let mut tree = KinematicTree::new();
        tree.add_frame(ROBOT, None, JointKind::Planar { stable: false }, Placement::planar(robot))?;
        tree.add_frame(GRIPPER, Some(ROBOT), JointKind::Fixed, Placement::identity())?;
        tree.add_frame(
            HUMAN,
            None,
            JointKind::Planar { stable: false },
            Placement::new(human.pelvis[0], human.pelvis[1], T::zero(), T::zero()),
        )?;
        tree.add_frame(
            HAND,
            None,
            JointKind::Free { stable: false },
            Placement::new(human.hand[0], human.hand[1], T::zero(), human.hand[2]),
        )?;
        for s in &surfaces {
            tree.add_frame(
                &s.name,
                None,
                JointKind::Fixed,
                Placement::new(s.center[0], s.center[1], T::zero(), s.height),
            )?;
        }
        Ok(GeometricState {
            tree,
            surfaces,
            objects: Vec::new(),
            t: 0,
            params: GeometryParams::default(),
        })
    }

    /// Places a new object on `surface` at world position `xy`.
    pub fn add_object(&mut self, name: &str, surface: &str, xy: [T; 2]) -> Result<(), KinematicsError> {
        let s = self.surface(surface)?;
        let local = Placement::new(xy[0] - s.center[0], xy[1] - s.center[1], T::zero(), T::zero());
        self.tree
            .add_frame(name, Some(surface), JointKind::Planar { stable: true }, local)?;
        self.objects.push(name.to_string());
        Ok(())
    }

    pub fn surfaces(&self) -> &[Surface<T>] {
        &self.surfaces
    }

    pub fn surface(&self, name: &str) -> Result<&Surface<T>, KinematicsError> {
        self.surfaces
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| KinematicsError::UnknownFrame(name.to_string()))
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn is_object(&self, name: &str) -> bool {
        self.objects.iter().any(|o| o == name)
    }

    pub fn robot(&self) -> Pose2<T> {
        self.tree.frame(ROBOT).expect("robot frame").placement.pose
    }

    pub fn set_robot(&mut self, q: Pose2<T>) {
        self.tree
            .set_placement(ROBOT, Placement::planar(q))
            .expect("robot frame");
    }

    pub fn gripper(&self) -> Placement<T> {
        self.tree.forward_kinematics(GRIPPER).expect("gripper frame")
    }

    pub fn human(&self) -> HumanConfig<T> {
        let p = self.tree.frame(HUMAN).expect("human frame").placement;
        let h = self.tree.frame(HAND).expect("hand frame").placement;
        HumanConfig::new(p.xy(), h.xyz())
    }

    pub fn set_human(&mut self, h: HumanConfig<T>) {
        self.tree
            .set_placement(HUMAN, Placement::new(h.pelvis[0], h.pelvis[1], T::zero(), T::zero()))
            .expect("human frame");
        self.tree
            .set_placement(HAND, Placement::new(h.hand[0], h.hand[1], T::zero(), h.hand[2]))
            .expect("hand frame");
    }

    pub fn object_world(&self, name: &str) -> Result<Placement<T>, KinematicsError> {
        if !self.is_object(name) {
            return Err(KinematicsError::UnknownFrame(name.to_string()));
        }
        self.tree.forward_kinematics(name)
    }

    pub fn holder(&self, object: &str) -> Result<Holder, KinematicsError> {
        if !self.is_object(object) {
            return Err(KinematicsError::UnknownFrame(object.to_string()));
        }
        let f = self.tree.frame(object)?;
        let parent = self.tree.parent_name(object)?;
        Ok(match (parent, f.joint) {
            (Some(GRIPPER), j) if j.is_stable_free() => Holder::Robot,
            (Some(HAND), j) if j.is_stable_free() => Holder::Human,
            (Some(p), j) if j.is_stable_planar() => Holder::Surface(p.to_string()),
            (p, _) => {
                return Err(KinematicsError::ObjectNotAttached {
                    object: object.to_string(),
                    expected: p.unwrap_or("world").to_string(),
                })
            }
        })
    }

    /// World xy of the objects resting on `surface`, skipping `except`.
    pub fn occupied(&self, surface: &str, except: &[&str]) -> Vec<[T; 2]> {
        self.objects
            .iter()
            .filter(|o| !except.contains(&o.as_str()))
            .filter(|o| matches!(self.holder(o), Ok(Holder::Surface(s)) if s == surface))
            .map(|o| self.object_world(o).expect("object frame").xy())
            .collect()
    }

    /// Objects currently carried by the human.
    pub fn human_carried(&self) -> Vec<&str> {
        self.objects
            .iter()
            .filter(|o| matches!(self.holder(o), Ok(Holder::Human)))
            .map(String::as_str)
            .collect()
    }

    pub fn robot_carried(&self) -> Option<&str> {
        self.objects
            .iter()
            .find(|o| matches!(self.holder(o), Ok(Holder::Robot)))
            .map(String::as_str)
    }

    fn attach(&mut self, object: &str, carrier: &str) -> Result<(), KinematicsError> {
        let rel = self.tree.relative(object, carrier)?;
        self.tree
            .reparent(object, Some(carrier), JointKind::Free { stable: true }, rel)
    }

    fn release(&mut self, object: &str, surface: &str) -> Result<(), KinematicsError> {
        let w = self.object_world(object)?;
        let s = self.surface(surface)?.clone();
        if !s.contains(w.xy(), -self.params.place_tolerance) {
            return Err(KinematicsError::PlacementOutsideSurface {
                object: object.to_string(),
                surface: surface.to_string(),
            });
        }
        let p = s.project(w.xy(), T::zero());
        let local = Placement::new(p[0] - s.center[0], p[1] - s.center[1], w.pose.phi, T::zero());
        self.tree
            .reparent(object, Some(surface), JointKind::Planar { stable: true }, local)
    }

    /// Robot grasps `object` from `surface`.
    pub fn robot_pick(&mut self, object: &str, surface: &str) -> Result<(), KinematicsError> {
        self.expect_holder(object, Holder::Surface(surface.to_string()), surface)?;
        let d = dist2(self.gripper().xy(), self.object_world(object)?.xy());
        if d > self.params.grasp_tolerance {
            return Err(KinematicsError::GraspTolerance {
                object: object.to_string(),
                distance: d.as_f64(),
            });
        }
        self.attach(object, GRIPPER)
    }

    /// Robot releases `object` onto `surface` at the current gripper pose.
    pub fn robot_place(&mut self, object: &str, surface: &str) -> Result<(), KinematicsError> {
        self.expect_holder(object, Holder::Robot, GRIPPER)?;
        self.release(object, surface)
    }

    /// Human hand grasps `object` from whatever surface it rests on.
    pub fn human_pick(&mut self, object: &str) -> Result<(), KinematicsError> {
        match self.holder(object)? {
            Holder::Surface(_) => {}
            _ => {
                return Err(KinematicsError::ObjectNotAttached {
                    object: object.to_string(),
                    expected: "surface".to_string(),
                })
            }
        }
        let hand = self.human().hand;
        let d = dist2([hand[0], hand[1]], self.object_world(object)?.xy());
        if d > self.params.human_grasp_tolerance {
            return Err(KinematicsError::GraspTolerance {
                object: object.to_string(),
                distance: d.as_f64(),
            });
        }
        self.attach(object, HAND)
    }

    /// Human releases `object` onto the surface nearest the hand.
    pub fn human_place(&mut self, object: &str) -> Result<String, KinematicsError> {
        self.expect_holder(object, Holder::Human, HAND)?;
        let xy = self.object_world(object)?.xy();
        let s = self
            .surfaces
            .iter()
            .min_by(|a, b| a.distance(xy).partial_cmp(&b.distance(xy)).unwrap())
            .ok_or_else(|| KinematicsError::UnknownFrame("surface".to_string()))?
            .clone();
        // Snap onto the surface so that slight overshoot still counts as a placement.
        let p = s.project(xy, T::zero());
        let local = Placement::new(p[0] - s.center[0], p[1] - s.center[1], T::zero(), T::zero());
        self.tree
            .reparent(object, Some(&s.name), JointKind::Planar { stable: true }, local)?;
        Ok(s.name)
    }

    fn expect_holder(&self, object: &str, want: Holder, expected: &str) -> Result<(), KinematicsError> {
        if self.holder(object)? != want {
            return Err(KinematicsError::ObjectNotAttached {
                object: object.to_string(),
                expected: expected.to_string(),
            });
        }
        Ok(())
    }
}
