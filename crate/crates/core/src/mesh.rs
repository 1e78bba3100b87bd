// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use crate::error::{Result, RigError};
use crate::math::Vec3;
use crate::skeleton::Aabb;

/// Triangle mesh. Normals, when present, are per vertex.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub normals: Option<Vec<Vec3>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshReport {
    /// Triangles with an index past the vertex list.
    pub out_of_range: Vec<usize>,
    /// Triangles with (numerically) zero area.
    pub degenerate: Vec<usize>,
    /// Edges used by exactly one triangle. Non-zero means the mesh is open.
    pub boundary_edges: usize,
}

impl MeshReport {
    pub fn is_valid(&self) -> bool {
        self.out_of_range.is_empty() && self.degenerate.is_empty()
    }
}

const DEGENERATE_AREA: f64 = 1e-14;

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Self {
        Mesh {
            vertices,
            triangles,
            normals: None,
        }
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Unit face normal following the counter-clockwise winding.
    pub fn face_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle(t);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::zeros()
        }
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn bounding_box(&self) -> Option<Aabb> {
        Aabb::from_points(&self.vertices)
    }

    pub fn validate(&self) -> MeshReport {
        let n = self.vertices.len();
        let mut report = MeshReport::default();
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                report.out_of_range.push(t);
                continue;
            }
            if self.triangle_area(t) <= DEGENERATE_AREA {
                report.degenerate.push(t);
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        report.boundary_edges = edges.values().filter(|&&c| c == 1).count();
        report
    }

    /// Errors on out-of-range indices; drops zero-area triangles.
    pub fn cleaned(&self) -> Result<Mesh> {
        let report = self.validate();
        if !report.out_of_range.is_empty() {
            return Err(RigError::InvalidMesh(format!(
                "triangle {} references a missing vertex",
                report.out_of_range[0]
            )));
        }
        let mut out = self.clone();
        if !report.degenerate.is_empty() {
            let drop: std::collections::HashSet<usize> = report.degenerate.into_iter().collect();
            out.triangles = self
                .triangles
                .iter()
                .enumerate()
                .filter(|(t, _)| !drop.contains(t))
                .map(|(_, tri)| *tri)
                .collect();
        }
        Ok(out)
    }

    pub fn is_closed(&self) -> bool {
        self.validate().boundary_edges == 0
    }

    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(f).collect(),
            triangles: self.triangles.clone(),
            normals: self.normals.clone(),
        }
    }

    /// Copy centred and uniformly scaled into `[-0.5, 0.5]³`, plus the box used.
    pub fn normalized(&self) -> (Mesh, Option<Aabb>) {
        match self.bounding_box() {
            Some(b) => (self.map_vertices(|p| b.normalize_point(p)), Some(b)),
            None => (self.clone(), None),
        }
    }
}
