// SPDX-License-Identifier: Apache-2.0

//! Recovery measures for synthetic scenes.

use super::{smoothness_regularizer, AnimParams, Rig, SmoothnessWeights, TrackSet};
use crate::deform::{forward_kinematics, skin_points};
use crate::error::{Result, RigError};
use crate::math::{geodesic_angle, Quat, Vec3};
use crate::weights::SkinWeights;

/// Joints whose local rotation moves some skinned vertex or child joint.
pub fn observable_joints(rig: &Rig) -> Vec<bool> {
    let j = rig.skeleton.len();
    let mut obs = vec![false; j];
    for row in rig.weights.rows() {
        for (k, &w) in row.iter().enumerate() {
            if w > 0.0 {
                obs[k] = true;
            }
        }
    }
    for p in rig.skeleton.parents().iter().flatten() {
        obs[*p] = true;
    }
    obs
}

/// Mean geodesic error in degrees over frames `1..n` and observable joints.
///
/// The root joint is compared through the composite of the root motion
/// rotation and its own local rotation, since only the product is
/// identifiable.
pub fn mean_rotation_error_deg(
    est: &AnimParams,
    gt: &AnimParams,
    root: usize,
    observable: &[bool],
) -> Result<f64> {
    if est.frame_count() != gt.frame_count() || est.joint_count() != gt.joint_count() {
        return Err(RigError::arg("animations differ in shape"));
    }
    let (mut total, mut count) = (0.0, 0usize);
    for (a, b) in est.frames.iter().zip(&gt.frames).skip(1) {
        for k in 0..a.joint_count() {
            if !observable[k] {
                continue;
            }
            let (qa, qb): (Quat, Quat) = if k == root {
                (
                    a.root_rotation * a.joint_rotations[k],
                    b.root_rotation * b.joint_rotations[k],
                )
            } else {
                (a.joint_rotations[k], b.joint_rotations[k])
            };
            total += geodesic_angle(&qa, &qb).to_degrees();
            count += 1;
        }
    }
    Ok(if count == 0 {
        0.0
    } else {
        total / count as f64
    })
}

/// Mean pixel distance between reprojected points and the tracks over all
/// masked observations of frames `1..n`.
pub fn mean_reprojection_error(params: &AnimParams, rig: &Rig, tracks: &TrackSet) -> Result<f64> {
    tracks.validate(rig)?;
    let rest: Vec<Vec3> = tracks
        .vertex_subset
        .iter()
        .map(|&v| rig.mesh.vertices[v])
        .collect();
    let w = SkinWeights::from_flat(
        rest.len(),
        rig.skeleton.len(),
        tracks
            .vertex_subset
            .iter()
            .flat_map(|&v| rig.weights.row(v).iter().copied())
            .collect(),
    )?;
    let cam = &tracks.camera;
    let (mut total, mut count) = (0.0, 0usize);
    let mut add = |p: &Vec3, target: &[f64; 2]| {
        if let Some(q) = cam.project(p) {
            total += ((q.u - target[0]).powi(2) + (q.v - target[1]).powi(2)).sqrt();
            count += 1;
        }
    };
    for (i, pose) in params.frames.iter().enumerate().skip(1) {
        let t = forward_kinematics(&rig.skeleton, pose)?;
        for (k, p) in t.positions.iter().enumerate() {
            if tracks.joint_visibility[k] {
                add(p, &tracks.joint_tracks[i][k]);
            }
        }
        for (n, p) in skin_points(&rest, &w, &t)?.iter().enumerate() {
            if tracks.vertex_visibility[n] {
                add(p, &tracks.vertex_tracks[i][n]);
            }
        }
    }
    Ok(if count == 0 {
        0.0
    } else {
        total / count as f64
    })
}

/// Smoothness value per consecutive frame pair.
pub fn smoothness_per_pair(params: &AnimParams, w: &SmoothnessWeights) -> f64 {
    let pairs = params.frame_count().saturating_sub(1).max(1);
    smoothness_regularizer(params, w).0 / pairs as f64
}
