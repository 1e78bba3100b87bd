// SPDX-License-Identifier: Apache-2.0

use super::{AnimParams, Rig, TrackSet};
use crate::deform::fk_ordered;
use crate::error::{Result, RigError};
use crate::geometry::{Camera, MIN_DEPTH};
use crate::math::{
    geodesic_sq_with_grad, quat_to_matrix, quat_to_matrix_backward, quat_to_wxyz, Mat3, Vec3,
};
use crate::par;
use crate::pose::Pose;

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingLoss {
    /// Joint term plus vertex term.
    pub value: f64,
    pub joint_term: f64,
    pub vertex_term: f64,
    /// Gradient over the free parameters.
    pub grad: Vec<f64>,
    /// Masked points skipped because they projected behind the camera.
    pub dropped: usize,
}

struct FrameOut {
    joint: f64,
    vertex: f64,
    grad: Vec<f64>,
    dropped: usize,
}

/// Squared pixel residual and its gradient with respect to the world point.
fn residual(cam: &Camera, x: &Vec3, target: &[f64; 2]) -> Option<(f64, Vec3)> {
    let c = cam.to_camera(x);
    if c.z <= MIN_DEPTH {
        return None;
    }
    let iz = 1.0 / c.z;
    let ru = cam.fx * c.x / c.z + cam.cx - target[0];
    let rv = cam.fy * c.y / c.z + cam.cy - target[1];
    let gc = Vec3::new(
        2.0 * ru * cam.fx * iz,
        2.0 * rv * cam.fy * iz,
        -2.0 * (ru * cam.fx * c.x + rv * cam.fy * c.y) * iz * iz,
    );
    Some((ru * ru + rv * rv, cam.rotation.transpose() * gc))
}

fn frame_loss(rig: &Rig, order: &[usize], tracks: &TrackSet, pose: &Pose, i: usize) -> FrameOut {
    let s = &rig.skeleton;
    let j = s.len();
    let c = s.joints();
    let cam = &tracks.camera;
    let r_root = quat_to_matrix(&pose.root_rotation);
    let local: Vec<Mat3> = pose.joint_rotations.iter().map(quat_to_matrix).collect();
    let t = fk_ordered(s, order, &r_root, &pose.root_translation, &local);

    let mut ga = vec![Mat3::zeros(); j];
    let mut gp = vec![Vec3::zeros(); j];
    let mut out = FrameOut {
        joint: 0.0,
        vertex: 0.0,
        grad: Vec::new(),
        dropped: 0,
    };
    for k in 0..j {
        if !tracks.joint_visibility[k] {
            continue;
        }
        match residual(cam, &t.positions[k], &tracks.joint_tracks[i][k]) {
            Some((l, g)) => {
                out.joint += l;
                gp[k] += g;
            }
            None => out.dropped += 1,
        }
    }
    for (n, &v) in tracks.vertex_subset.iter().enumerate() {
        if !tracks.vertex_visibility[n] {
            continue;
        }
        let rest = rig.mesh.vertices[v];
        let w = rig.weights.row(v);
        let mut d = Vec3::zeros();
        for k in 0..j {
            if w[k] != 0.0 {
                d += t.displacement(k, &rest) * w[k];
            }
        }
        let x = rest + d;
        match residual(cam, &x, &tracks.vertex_tracks[i][n]) {
            Some((l, g)) => {
                out.vertex += l;
                for k in 0..j {
                    if w[k] != 0.0 {
                        gp[k] += g * w[k];
                        ga[k] += (g * w[k]) * (rest - c[k]).transpose();
                    }
                }
            }
            None => out.dropped += 1,
        }
    }
    if i == 0 {
        return out;
    }

    let mut gr = vec![Mat3::zeros(); j];
    let mut g_root_r = Mat3::zeros();
    let mut g_root_t = Vec3::zeros();
    for &k in order.iter().rev() {
        match s.parents()[k] {
            Some(p) => {
                let ap = t.rotations[p];
                gr[k] = ap.transpose() * ga[k];
                let (gak, gpk) = (ga[k], gp[k]);
                ga[p] += gak * local[k].transpose() + gpk * (c[k] - c[p]).transpose();
                gp[p] += gpk;
            }
            None => {
                gr[k] = r_root.transpose() * ga[k];
                g_root_r = ga[k] * local[k].transpose();
                g_root_t = gp[k];
            }
        }
    }
    let mut grad = Vec::with_capacity(AnimParams::frame_len(j));
    grad.extend(quat_to_wxyz(&quat_to_matrix_backward(
        &pose.root_rotation,
        &g_root_r,
    )));
    grad.extend(g_root_t.iter());
    for k in 0..j {
        grad.extend(quat_to_wxyz(&quat_to_matrix_backward(
            &pose.joint_rotations[k],
            &gr[k],
        )));
    }
    out.grad = grad;
    out
}

fn check(params: &AnimParams, rig: &Rig, tracks: &TrackSet) -> Result<()> {
    tracks.validate(rig)?;
    if params.frame_count() != tracks.frame_count() {
        return Err(RigError::shape(
            "animation frames",
            tracks.frame_count(),
            params.frame_count(),
        ));
    }
    if params.joint_count() != rig.skeleton.len() {
        return Err(RigError::shape(
            "animation joints",
            rig.skeleton.len(),
            params.joint_count(),
        ));
    }
    Ok(())
}

/// `Σ_i Σ_k M_j ‖p − p'‖² + Σ_i Σ_v M_v ‖p − p'‖²` over all frames.
///
/// Frame 0 contributes to the value but has no parameters.
pub fn tracking_loss(params: &AnimParams, rig: &Rig, tracks: &TrackSet) -> Result<TrackingLoss> {
    check(params, rig, tracks)?;
    let order = rig.skeleton.topological_order()?;
    let frames = par::map_range(params.frame_count(), |i| {
        frame_loss(rig, &order, tracks, &params.frames[i], i)
    });
    let mut out = TrackingLoss {
        value: 0.0,
        joint_term: 0.0,
        vertex_term: 0.0,
        grad: Vec::with_capacity(params.free_len()),
        dropped: 0,
    };
    for f in frames {
        out.joint_term += f.joint;
        out.vertex_term += f.vertex;
        out.dropped += f.dropped;
        out.grad.extend(f.grad);
    }
    out.value = out.joint_term + out.vertex_term;
    Ok(out)
}

/// Weights of the rotation and root-translation smoothness terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessWeights {
    pub rotation: f64,
    pub translation: f64,
}

impl Default for SmoothnessWeights {
    fn default() -> Self {
        SmoothnessWeights {
            rotation: 1.0,
            translation: 1.0,
        }
    }
}

/// `Σ_i w_r [Σ_k geo(q_k^i, q_k^{i+1})² + geo(Q^i, Q^{i+1})²] + w_t ‖T^{i+1} − T^i‖²`
/// with the rest frame as the first anchor. Returns the value and the
/// gradient over the free parameters.
pub fn smoothness_regularizer(params: &AnimParams, w: &SmoothnessWeights) -> (f64, Vec<f64>) {
    let j = params.joint_count();
    let len = AnimParams::frame_len(j);
    let mut grad = vec![0.0; params.free_len()];
    let mut value = 0.0;
    let add = |grad: &mut Vec<f64>, frame: usize, offset: usize, g: [f64; 4], scale: f64| {
        if frame > 0 {
            let base = (frame - 1) * len + offset;
            for (d, x) in grad[base..base + 4].iter_mut().zip(g) {
                *d += x * scale;
            }
        }
    };
    for i in 0..params.frame_count().saturating_sub(1) {
        let (a, b) = (&params.frames[i], &params.frames[i + 1]);
        let (v, ga, gb) = geodesic_sq_with_grad(&a.root_rotation, &b.root_rotation);
        value += w.rotation * v;
        add(&mut grad, i, 0, quat_to_wxyz(&ga), w.rotation);
        add(&mut grad, i + 1, 0, quat_to_wxyz(&gb), w.rotation);
        let dt = b.root_translation - a.root_translation;
        value += w.translation * dt.norm_squared();
        for d in 0..3 {
            if i > 0 {
                grad[(i - 1) * len + 4 + d] -= 2.0 * w.translation * dt[d];
            }
            grad[i * len + 4 + d] += 2.0 * w.translation * dt[d];
        }
        for k in 0..j {
            let (v, ga, gb) = geodesic_sq_with_grad(&a.joint_rotations[k], &b.joint_rotations[k]);
            value += w.rotation * v;
            add(&mut grad, i, 7 + 4 * k, quat_to_wxyz(&ga), w.rotation);
            add(&mut grad, i + 1, 7 + 4 * k, quat_to_wxyz(&gb), w.rotation);
        }
    }
    (value, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::quat_from_axis_angle;

    #[test]
    fn constant_params_have_zero_smoothness() {
        let mut p = AnimParams::identity(4, 3);
        let (v, g) = smoothness_regularizer(&p, &SmoothnessWeights::default());
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|&x| x == 0.0));
        for f in &mut p.frames[1..] {
            f.root_translation = Vec3::zeros();
        }
        assert_eq!(
            smoothness_regularizer(&p, &SmoothnessWeights::default()).0,
            0.0
        );
    }

    #[test]
    fn ten_degree_steps() {
        let mut p = AnimParams::identity(3, 1);
        for i in 1..3 {
            p.frames[i].joint_rotations[0] =
                quat_from_axis_angle(&Vec3::z(), (10.0 * i as f64).to_radians());
        }
        let (v, _) = smoothness_regularizer(&p, &SmoothnessWeights::default());
        assert!((v - 2.0 * 10f64.to_radians().powi(2)).abs() < 1e-12);
    }
}
