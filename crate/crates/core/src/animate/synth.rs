// SPDX-License-Identifier: Apache-2.0

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{joint_visibility, vertex_visibility, AnimParams, Rig, TrackSet};
use crate::deform::{forward_kinematics, skin_points};
use crate::error::{Result, RigError};
use crate::geometry::Camera;
use crate::math::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Standard deviation of the per-axis Gaussian pixel noise.
    pub noise_px: f64,
    pub seed: u64,
    /// Number of tracked vertices; capped at the vertex count.
    pub vertex_count: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            noise_px: 0.0,
            seed: 0,
            vertex_count: 256,
        }
    }
}

fn to_px(cam: &Camera, p: &Vec3) -> [f64; 2] {
    cam.project(p).map_or([0.0, 0.0], |q| [q.u, q.v])
}

/// Renders tracks of a ground-truth animation. Noise is added from frame 1
/// on; frame 0 holds the exact query positions.
pub fn synthesize_tracks(
    rig: &Rig,
    gt: &AnimParams,
    cam: &Camera,
    cfg: &SynthConfig,
) -> Result<TrackSet> {
    gt.validate()?;
    if gt.joint_count() != rig.skeleton.len() {
        return Err(RigError::shape(
            "animation joints",
            rig.skeleton.len(),
            gt.joint_count(),
        ));
    }
    if !(cfg.noise_px >= 0.0 && cfg.noise_px.is_finite()) {
        return Err(RigError::arg("noise must be non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nv = rig.mesh.vertices.len();
    let mut subset = index::sample(&mut rng, nv, cfg.vertex_count.min(nv)).into_vec();
    subset.sort_unstable();

    let joint_vis = joint_visibility(&rig.mesh, &rig.skeleton, cam)?;
    let vertex_vis = vertex_visibility(&rig.mesh, cam, &subset)?;
    let rest: Vec<Vec3> = subset.iter().map(|&v| rig.mesh.vertices[v]).collect();
    let sub_w = crate::weights::SkinWeights::from_flat(
        subset.len(),
        rig.skeleton.len(),
        subset
            .iter()
            .flat_map(|&v| rig.weights.row(v).iter().copied())
            .collect(),
    )?;
    let noise = Normal::new(0.0, cfg.noise_px.max(f64::MIN_POSITIVE)).expect("valid sigma");

    let mut joint_tracks = Vec::with_capacity(gt.frame_count());
    let mut vertex_tracks = Vec::with_capacity(gt.frame_count());
    for (i, pose) in gt.frames.iter().enumerate() {
        let t = forward_kinematics(&rig.skeleton, pose)?;
        let verts = skin_points(&rest, &sub_w, &t)?;
        let mut jt: Vec<[f64; 2]> = t.positions.iter().map(|p| to_px(cam, p)).collect();
        let mut vt: Vec<[f64; 2]> = verts.iter().map(|p| to_px(cam, p)).collect();
        if i > 0 && cfg.noise_px > 0.0 {
            for p in jt.iter_mut().chain(vt.iter_mut()) {
                p[0] += noise.sample(&mut rng);
                p[1] += noise.sample(&mut rng);
            }
        }
        joint_tracks.push(jt);
        vertex_tracks.push(vt);
    }
    Ok(TrackSet {
        camera: cam.clone(),
        joint_tracks,
        vertex_tracks,
        vertex_subset: subset,
        joint_visibility: joint_vis,
        vertex_visibility: vertex_vis,
    })
}
