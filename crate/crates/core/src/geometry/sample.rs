// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, RigError};
use crate::math::Vec3;
use crate::mesh::Mesh;

pub const DEFAULT_SAMPLE_COUNT: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSamples {
    pub points: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    /// Source triangle of each sample.
    pub triangles: Vec<usize>,
}

/// Area-weighted triangle choice, uniform barycentric placement, face normals.
pub fn sample_surface(m: &Mesh, n: usize, seed: u64) -> Result<SurfaceSamples> {
    let mut cdf = Vec::with_capacity(m.triangles.len());
    let mut total = 0.0;
    for t in 0..m.triangles.len() {
        total += m.triangle_area(t);
        cdf.push(total);
    }
    if !(total > 0.0) {
        return Err(RigError::InvalidMesh("mesh has zero surface area".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SurfaceSamples {
        points: Vec::with_capacity(n),
        normals: Vec::with_capacity(n),
        triangles: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let x = rng.random::<f64>() * total;
        let t = cdf.partition_point(|&c| c <= x).min(cdf.len() - 1);
        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
        let s = r1.sqrt();
        let [a, b, c] = m.triangle(t);
        out.points
            .push(a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2));
        out.normals.push(m.face_normal(t));
        out.triangles.push(t);
    }
    Ok(out)
}
