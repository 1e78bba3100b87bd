// SPDX-License-Identifier: Apache-2.0

//! First-frame visibility.
//!
//! A joint is visible when the camera-to-joint segment, extended by
//! [`JOINT_BAND`], crosses the surface exactly once. A joint inside a closed
//! limb therefore counts as visible when nothing else is in front of the
//! limb, and a joint floating outside the surface with a clear line of sight
//! counts as invisible (zero crossings).
//!
//! A vertex is visible when the first surface hit toward it is within
//! [`VERTEX_TOLERANCE`] of the vertex itself.

use crate::error::{Result, RigError};
use crate::geometry::{Camera, RayCaster};
use crate::math::Vec3;
use crate::mesh::Mesh;
use crate::par;
use crate::skeleton::Skeleton;

pub const JOINT_BAND: f64 = 1e-6;
pub const VERTEX_TOLERANCE: f64 = 1e-4;

fn check_outside(rc: &RayCaster, eye: &Vec3) -> Result<()> {
    // Odd parity along a fixed skew direction means the eye is enclosed.
    let dir = Vec3::new(0.5772, 0.3291, 0.7468);
    if rc.intersections(eye, &dir)?.len() % 2 == 1 {
        return Err(RigError::arg("camera is inside the mesh"));
    }
    Ok(())
}

pub fn joint_visibility(m: &Mesh, s: &Skeleton, cam: &Camera) -> Result<Vec<bool>> {
    cam.validate()?;
    let rc = RayCaster::new(m);
    let eye = cam.center();
    check_outside(&rc, &eye)?;
    let res: Result<Vec<bool>> = par::map_slice(s.joints(), |j| {
        let d = j - eye;
        let dist = d.norm();
        if dist == 0.0 {
            return Ok(false);
        }
        Ok(rc.intersections_within(&eye, &d, dist + JOINT_BAND)?.len() == 1)
    })
    .into_iter()
    .collect();
    res
}

pub fn vertex_visibility(m: &Mesh, cam: &Camera, subset: &[usize]) -> Result<Vec<bool>> {
    cam.validate()?;
    if let Some(&v) = subset.iter().find(|&&v| v >= m.vertices.len()) {
        return Err(RigError::arg(format!("vertex {v} out of range")));
    }
    let rc = RayCaster::new(m);
    let eye = cam.center();
    let res: Result<Vec<bool>> = par::map_slice(subset, |&v| {
        let d = m.vertices[v] - eye;
        let dist = d.norm();
        if dist == 0.0 {
            return Ok(false);
        }
        Ok(match rc.first_hit(&eye, &d)? {
            Some(h) => (h.t - dist).abs() <= VERTEX_TOLERANCE,
            None => false,
        })
    })
    .into_iter()
    .collect();
    res
}
