// SPDX-License-Identifier: Apache-2.0

use crate::error::{Result, RigError};
use crate::geometry::Camera;
use crate::mesh::Mesh;
use crate::skeleton::Skeleton;
use crate::weights::SkinWeights;

/// Skeleton, rest mesh and weights.
#[derive(Debug, Clone)]
pub struct Rig {
    pub skeleton: Skeleton,
    pub mesh: Mesh,
    pub weights: SkinWeights,
}

impl Rig {
    pub fn new(skeleton: Skeleton, mesh: Mesh, weights: SkinWeights) -> Result<Rig> {
        skeleton.ensure_valid()?;
        weights.check_shape(mesh.vertices.len(), skeleton.len())?;
        Ok(Rig {
            skeleton,
            mesh,
            weights,
        })
    }
}

/// 2D trajectories with first-frame visibility. Image size is the camera's.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSet {
    pub camera: Camera,
    /// `frames × joints` pixel positions.
    pub joint_tracks: Vec<Vec<[f64; 2]>>,
    /// `frames × vertex_subset.len()` pixel positions.
    pub vertex_tracks: Vec<Vec<[f64; 2]>>,
    pub vertex_subset: Vec<usize>,
    pub joint_visibility: Vec<bool>,
    pub vertex_visibility: Vec<bool>,
}

impl TrackSet {
    pub fn frame_count(&self) -> usize {
        self.joint_tracks.len()
    }

    /// Masked points per frame.
    pub fn observations_per_frame(&self) -> usize {
        self.joint_visibility.iter().filter(|&&v| v).count()
            + self.vertex_visibility.iter().filter(|&&v| v).count()
    }

    pub fn validate(&self, rig: &Rig) -> Result<()> {
        self.camera.validate()?;
        let (j, vs) = (rig.skeleton.len(), self.vertex_subset.len());
        if self.joint_visibility.len() != j {
            return Err(RigError::shape(
                "joint visibility",
                j,
                self.joint_visibility.len(),
            ));
        }
        if self.vertex_visibility.len() != vs {
            return Err(RigError::shape(
                "vertex visibility",
                vs,
                self.vertex_visibility.len(),
            ));
        }
        if self.vertex_tracks.len() != self.joint_tracks.len() {
            return Err(RigError::shape(
                "vertex track frames",
                self.joint_tracks.len(),
                self.vertex_tracks.len(),
            ));
        }
        if self.joint_tracks.is_empty() {
            return Err(RigError::arg("track set has no frames"));
        }
        if let Some(&v) = self
            .vertex_subset
            .iter()
            .find(|&&v| v >= rig.mesh.vertices.len())
        {
            return Err(RigError::arg(format!(
                "vertex subset index {v} out of range"
            )));
        }
        for (i, (jt, vt)) in self
            .joint_tracks
            .iter()
            .zip(&self.vertex_tracks)
            .enumerate()
        {
            if jt.len() != j {
                return Err(RigError::arg(format!(
                    "frame {i}: {} joint tracks, expected {j}",
                    jt.len()
                )));
            }
            if vt.len() != vs {
                return Err(RigError::arg(format!(
                    "frame {i}: {} vertex tracks, expected {vs}",
                    vt.len()
                )));
            }
            if jt.iter().chain(vt).flatten().any(|x| !x.is_finite()) {
                return Err(RigError::NonFinite("tracks"));
            }
        }
        Ok(())
    }
}
