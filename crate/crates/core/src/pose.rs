// SPDX-License-Identifier: Apache-2.0

use crate::error::{Result, RigError};
use crate::math::{identity_quat, Quat, Vec3};

/// Unit-norm tolerance for quaternions handed to kinematics.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// One articulated configuration: root motion plus per-joint local rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub root_rotation: Quat,
    pub root_translation: Vec3,
    pub joint_rotations: Vec<Quat>,
}

impl Pose {
    pub fn identity(joints: usize) -> Self {
        Pose {
            root_rotation: identity_quat(),
            root_translation: Vec3::zeros(),
            joint_rotations: vec![identity_quat(); joints],
        }
    }

    pub fn joint_count(&self) -> usize {
        self.joint_rotations.len()
    }

    pub fn is_identity(&self) -> bool {
        let id = identity_quat();
        self.root_rotation == id
            && self.root_translation == Vec3::zeros()
            && self.joint_rotations.iter().all(|q| *q == id)
    }

    pub fn check_unit(&self) -> Result<()> {
        let bad = |q: &Quat| (q.norm() - 1.0).abs() > UNIT_TOLERANCE || !q.norm().is_finite();
        if bad(&self.root_rotation) || self.joint_rotations.iter().any(bad) {
            return Err(RigError::arg("pose quaternion is not unit length"));
        }
        if !self.root_translation.iter().all(|c| c.is_finite()) {
            return Err(RigError::NonFinite("root translation"));
        }
        Ok(())
    }
}
