// SPDX-License-Identifier: Apache-2.0

use crate::error::{Result, RigError};
use crate::math::Vec3;
use crate::mesh::Mesh;
use crate::par;
use crate::weights::SkinWeights;

/// Index of the closest point; ties resolve to the lowest index.
fn nearest(points: &[Vec3], q: &Vec3) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, p) in points.iter().enumerate() {
        let d = (p - q).norm_squared();
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

fn gather(rows: &SkinWeights, picks: Vec<usize>) -> Result<SkinWeights> {
    let j = rows.joint_count();
    let data = picks
        .iter()
        .flat_map(|&i| rows.row(i).iter().copied())
        .collect();
    SkinWeights::from_flat(picks.len(), j, data)
}

/// Each mesh vertex takes the weight row of its nearest sampled point.
pub fn nearest_vertex_transfer(
    points: &[Vec3],
    point_weights: &SkinWeights,
    m: &Mesh,
) -> Result<SkinWeights> {
    if points.is_empty() || m.vertices.is_empty() {
        return Err(RigError::arg("weight transfer needs points and vertices"));
    }
    if point_weights.vertex_count() != points.len() {
        return Err(RigError::shape(
            "point weights",
            points.len(),
            point_weights.vertex_count(),
        ));
    }
    gather(
        point_weights,
        par::map_slice(&m.vertices, |v| nearest(points, v)),
    )
}

/// Each sampled point takes the weight row of its nearest mesh vertex.
pub fn nearest_point_transfer(
    m: &Mesh,
    vertex_weights: &SkinWeights,
    points: &[Vec3],
) -> Result<SkinWeights> {
    if points.is_empty() || m.vertices.is_empty() {
        return Err(RigError::arg("weight transfer needs points and vertices"));
    }
    if vertex_weights.vertex_count() != m.vertices.len() {
        return Err(RigError::shape(
            "vertex weights",
            m.vertices.len(),
            vertex_weights.vertex_count(),
        ));
    }
    gather(
        vertex_weights,
        par::map_slice(points, |p| nearest(&m.vertices, p)),
    )
}
