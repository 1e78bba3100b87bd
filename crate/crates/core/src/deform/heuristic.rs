// SPDX-License-Identifier: Apache-2.0

use crate::error::{Result, RigError};
use crate::math::point_segment_distance;
use crate::mesh::Mesh;
use crate::par;
use crate::skeleton::Skeleton;
use crate::weights::SkinWeights;

pub const DEFAULT_K_NEAREST: usize = 4;
pub const DEFAULT_FALLOFF: f64 = 0.05;

/// Distance-falloff weights over the `k_nearest` closest bones.
///
/// A bone `(parent, child)` moves rigidly with its parent joint under the
/// rotate-about-joint convention, so its weight lands in the parent's column.
/// Weights are `exp(−(d² − d_min²)/falloff²)`, shifted by the nearest bone's
/// distance so far vertices do not underflow.
pub fn heuristic_skin_weights(
    m: &Mesh,
    s: &Skeleton,
    k_nearest: usize,
    falloff: f64,
) -> Result<SkinWeights> {
    s.ensure_valid()?;
    if k_nearest == 0 {
        return Err(RigError::arg("k_nearest must be at least 1"));
    }
    if !(falloff > 0.0 && falloff.is_finite()) {
        return Err(RigError::arg("falloff must be positive"));
    }
    let j = s.len();
    let root = s.root().expect("validated");
    if j == 1 {
        return Ok(SkinWeights::one_hot(1, &vec![root; m.vertices.len()]));
    }
    let bones = s.bones();
    let c = s.joints();
    if bones.iter().all(|&(p, k)| c[p] == c[k]) {
        return Err(RigError::arg("all joints coincide"));
    }
    let f2 = falloff * falloff;
    let rows = par::map_slice(&m.vertices, |v| {
        let mut d: Vec<(f64, usize)> = bones
            .iter()
            .enumerate()
            .map(|(b, &(p, k))| (point_segment_distance(v, &c[p], &c[k]), b))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let dmin2 = d[0].0 * d[0].0;
        let mut row = vec![0.0; j];
        for &(dist, b) in d.iter().take(k_nearest) {
            row[bones[b].0] += (-(dist * dist - dmin2) / f2).exp();
        }
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= sum);
        row
    });
    SkinWeights::from_flat(m.vertices.len(), j, rows.concat())
}
