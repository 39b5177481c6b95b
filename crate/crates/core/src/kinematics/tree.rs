use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::pose::Placement;
use super::KinematicsError;
use crate::Real;

/// Joint connecting a frame to its parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JointKind {
    Fixed,
    /// Planar x, y, phi. Stable when an object rests on a surface.
    Planar { stable: bool },
    /// Free 6D joint. Stable when an agent holds an object.
    Free { stable: bool },
}

impl JointKind {
    pub fn is_stable_planar(&self) -> bool {
        matches!(self, JointKind::Planar { stable: true })
    }

    pub fn is_stable_free(&self) -> bool {
        matches!(self, JointKind::Free { stable: true })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Frame<T> {
    pub name: String,
    /// `None` for children of the world root.
    pub parent: Option<usize>,
    pub joint: JointKind,
    /// Placement relative to the parent (the joint value for movable joints).
    pub placement: Placement<T>,
}

/// Tree of named frames rooted at the world.
#[derive(Clone, Debug, PartialEq)]
pub struct KinematicTree<T> {
    frames: Vec<Frame<T>>,
    index: HashMap<String, usize>,
}

impl<T: Real> Default for KinematicTree<T> {
    fn default() -> Self {
        KinematicTree {
            frames: Vec::new(),
            index: HashMap::new(),
        }
    }
}

impl<T: Real> KinematicTree<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_frame(
        &mut self,
        name: &str,
        parent: Option<&str>,
        joint: JointKind,
        placement: Placement<T>,
    ) -> Result<usize, KinematicsError> {
        if self.index.contains_key(name) || name == super::WORLD {
            return Err(KinematicsError::DuplicateFrame(name.to_string()));
        }
        let parent = parent.map(|p| self.id(p)).transpose()?;
        let id = self.frames.len();
        self.frames.push(Frame {
            name: name.to_string(),
            parent,
            joint,
            placement,
        });
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Result<usize, KinematicsError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| KinematicsError::UnknownFrame(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn frame(&self, name: &str) -> Result<&Frame<T>, KinematicsError> {
        Ok(&self.frames[self.id(name)?])
    }

    pub fn frames(&self) -> &[Frame<T>] {
        &self.frames
    }

    /// Parent frame name, or `None` for world children.
    pub fn parent_name(&self, name: &str) -> Result<Option<&str>, KinematicsError> {
        let f = self.frame(name)?;
        Ok(f.parent.map(|p| self.frames[p].name.as_str()))
    }

    pub fn set_placement(&mut self, name: &str, placement: Placement<T>) -> Result<(), KinematicsError> {
        let id = self.id(name)?;
        self.frames[id].placement = placement;
        Ok(())
    }

    /// Moves `name` under `parent` with a new joint and local placement.
    pub fn reparent(
        &mut self,
        name: &str,
        parent: Option<&str>,
        joint: JointKind,
        placement: Placement<T>,
    ) -> Result<(), KinematicsError> {
        let id = self.id(name)?;
        let pid = parent.map(|p| self.id(p)).transpose()?;
        let mut cursor = pid;
        while let Some(c) = cursor {
            if c == id {
                return Err(KinematicsError::Cycle(name.to_string()));
            }
            cursor = self.frames[c].parent;
        }
        let f = &mut self.frames[id];
        f.parent = pid;
        f.joint = joint;
        f.placement = placement;
        Ok(())
    }

    /// World placement of `name`, composed along its parent chain.
    pub fn forward_kinematics(&self, name: &str) -> Result<Placement<T>, KinematicsError> {
        Ok(self.world_of(self.id(name)?))
    }

    fn world_of(&self, id: usize) -> Placement<T> {
        let mut chain = vec![id];
        let mut cursor = self.frames[id].parent;
        while let Some(p) = cursor {
            chain.push(p);
            cursor = self.frames[p].parent;
        }
        chain
            .iter()
            .rev()
            .fold(Placement::identity(), |acc, &f| acc.compose(&self.frames[f].placement))
    }

    /// Placement of `name` expressed in the frame `relative_to`.
    pub fn relative(&self, name: &str, relative_to: &str) -> Result<Placement<T>, KinematicsError> {
        let w = self.forward_kinematics(name)?;
        let r = self.forward_kinematics(relative_to)?;
        Ok(r.inverse().compose(&w))
    }
}
