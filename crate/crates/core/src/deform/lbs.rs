// SPDX-License-Identifier: Apache-2.0

use super::JointTransforms;
use crate::error::{Result, RigError};
use crate::math::Vec3;
use crate::mesh::Mesh;
use crate::par;
use crate::skeleton::Skeleton;
use crate::weights::SkinWeights;

/// `v' = Σ_k w[v][k] · T_k(v)` for arbitrary points, evaluated as
/// `v + Σ_k w[v][k] · (T_k(v) − v)` so identity transforms are exact.
pub fn skin_points(points: &[Vec3], w: &SkinWeights, t: &JointTransforms) -> Result<Vec<Vec3>> {
    w.check_shape(points.len(), t.len())?;
    Ok(par::map_range(points.len(), |v| {
        let x = points[v];
        let mut d = Vec3::zeros();
        for (k, &wk) in w.row(v).iter().enumerate() {
            if wk != 0.0 {
                d += t.displacement(k, &x) * wk;
            }
        }
        x + d
    }))
}

pub fn linear_blend_skinning(
    m: &Mesh,
    s: &Skeleton,
    w: &SkinWeights,
    t: &JointTransforms,
) -> Result<Vec<Vec3>> {
    if t.len() != s.len() {
        return Err(RigError::shape("joint transforms", s.len(), t.len()));
    }
    skin_points(&m.vertices, w, t)
}

/// Posed copy of the mesh; normals are dropped.
pub fn deform_mesh(m: &Mesh, s: &Skeleton, w: &SkinWeights, t: &JointTransforms) -> Result<Mesh> {
    Ok(Mesh {
        vertices: linear_blend_skinning(m, s, w, t)?,
        triangles: m.triangles.clone(),
        normals: None,
    })
}
