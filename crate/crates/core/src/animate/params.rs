// SPDX-License-Identifier: Apache-2.0

use crate::error::{Result, RigError};
use crate::math::{normalize_quat, quat_from_wxyz, quat_to_wxyz};
use crate::pose::Pose;

/// Per-frame poses; `frames[0]` is the fixed rest pose.
#[derive(Debug, Clone, PartialEq)]
pub struct AnimParams {
    pub frames: Vec<Pose>,
}

impl AnimParams {
    pub fn identity(frames: usize, joints: usize) -> Self {
        AnimParams {
            frames: vec![Pose::identity(joints); frames],
        }
    }

    /// Prepends the rest frame to `frames[1..]`-style poses.
    pub fn from_free_frames(joints: usize, free: Vec<Pose>) -> Self {
        let mut frames = vec![Pose::identity(joints)];
        frames.extend(free);
        AnimParams { frames }
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn joint_count(&self) -> usize {
        self.frames.first().map_or(0, |f| f.joint_count())
    }

    pub fn frame_len(joints: usize) -> usize {
        7 + 4 * joints
    }

    /// Length of the free-parameter vector.
    pub fn free_len(&self) -> usize {
        self.frame_count().saturating_sub(1) * Self::frame_len(self.joint_count())
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.frames.first() else {
            return Err(RigError::arg("animation has no frames"));
        };
        if !first.is_identity() {
            return Err(RigError::arg("frame 0 must be the identity pose"));
        }
        let j = first.joint_count();
        for (i, f) in self.frames.iter().enumerate() {
            if f.joint_count() != j {
                return Err(RigError::arg(format!(
                    "frame {i} has {} joints, expected {j}",
                    f.joint_count()
                )));
            }
            f.check_unit()
                .map_err(|e| RigError::arg(format!("frame {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.free_len());
        for f in &self.frames[1..] {
            out.extend(quat_to_wxyz(&f.root_rotation));
            out.extend(f.root_translation.iter());
            for q in &f.joint_rotations {
                out.extend(quat_to_wxyz(q));
            }
        }
        out
    }

    /// Inverse of [`to_flat`](Self::to_flat); frame 0 is left untouched.
    pub fn set_flat(&mut self, x: &[f64]) {
        let len = Self::frame_len(self.joint_count());
        for (f, chunk) in self.frames[1..].iter_mut().zip(x.chunks(len)) {
            let q = |o: usize| quat_from_wxyz([chunk[o], chunk[o + 1], chunk[o + 2], chunk[o + 3]]);
            f.root_rotation = q(0);
            f.root_translation = crate::math::Vec3::new(chunk[4], chunk[5], chunk[6]);
            for (k, r) in f.joint_rotations.iter_mut().enumerate() {
                *r = q(7 + 4 * k);
            }
        }
    }

    pub fn renormalize(&mut self) {
        for f in &mut self.frames[1..] {
            f.root_rotation = normalize_quat(&f.root_rotation);
            for q in &mut f.joint_rotations {
                *q = normalize_quat(q);
            }
        }
    }
}
