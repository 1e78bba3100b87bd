// SPDX-License-Identifier: Apache-2.0

use nalgebra::Matrix4;

use crate::error::{Result, RigError};
use crate::math::{quat_to_matrix, Mat3, Vec3};
use crate::pose::Pose;
use crate::skeleton::Skeleton;

/// Global rest-to-posed transform of every joint.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTransforms {
    /// Global rotation `A_k`.
    pub rotations: Vec<Mat3>,
    /// Posed joint position `p_k`.
    pub positions: Vec<Vec3>,
    /// Rest joint position `c_k`.
    pub rest: Vec<Vec3>,
}

impl JointTransforms {
    pub fn identity(s: &Skeleton) -> Self {
        JointTransforms {
            rotations: vec![Mat3::identity(); s.len()],
            positions: s.joints().to_vec(),
            rest: s.joints().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// `T_k(x)`.
    pub fn apply(&self, k: usize, x: &Vec3) -> Vec3 {
        x + self.displacement(k, x)
    }

    /// `T_k(x) − x`, written so that an identity transform yields exact zeros.
    pub fn displacement(&self, k: usize, x: &Vec3) -> Vec3 {
        (self.rotations[k] - Mat3::identity()) * (x - self.rest[k])
            + (self.positions[k] - self.rest[k])
    }

    /// `T_k` as a homogeneous matrix.
    pub fn matrix(&self, k: usize) -> Matrix4<f64> {
        let a = self.rotations[k];
        let t = self.positions[k] - a * self.rest[k];
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&a);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        m
    }
}

/// FK over a precomputed parent-before-child order with rotation matrices.
pub(crate) fn fk_ordered(
    s: &Skeleton,
    order: &[usize],
    root_rotation: &Mat3,
    root_translation: &Vec3,
    local: &[Mat3],
) -> JointTransforms {
    let n = s.len();
    let c = s.joints();
    let mut rotations = vec![Mat3::identity(); n];
    let mut positions = vec![Vec3::zeros(); n];
    for &k in order {
        match s.parents()[k] {
            None => {
                rotations[k] = root_rotation * local[k];
                positions[k] = c[k] + root_translation;
            }
            Some(p) => {
                rotations[k] = rotations[p] * local[k];
                positions[k] = rotations[p] * (c[k] - c[p]) + positions[p];
            }
        }
    }
    JointTransforms {
        rotations,
        positions,
        rest: c.to_vec(),
    }
}

pub fn forward_kinematics(s: &Skeleton, p: &Pose) -> Result<JointTransforms> {
    if p.joint_count() != s.len() {
        return Err(RigError::shape("pose joints", s.len(), p.joint_count()));
    }
    p.check_unit()?;
    let order = s.topological_order()?;
    let local: Vec<Mat3> = p.joint_rotations.iter().map(quat_to_matrix).collect();
    Ok(fk_ordered(
        s,
        &order,
        &quat_to_matrix(&p.root_rotation),
        &p.root_translation,
        &local,
    ))
}
