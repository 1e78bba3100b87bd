// SPDX-License-Identifier: Apache-2.0

//! Skeleton chamfer metrics and skinning-weight metrics.
//!
//! Chamfer values average the two directed means. Functions take skeletons
//! as given; [`normalize_pair`] applies the configured bounding-box
//! normalization first and [`evaluate`] does both.

use crate::deform::{
    forward_kinematics, linear_blend_skinning, sample_augmented_pose_with, AugmentConfig,
};
use crate::error::{Result, RigError};
use crate::math::{point_segment_distance, Vec3};
use crate::mesh::Mesh;
use crate::par;
use crate::skeleton::{Aabb, Skeleton};
use crate::weights::SkinWeights;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Use coordinates as given.
    None,
    /// Each skeleton by its own bounding box.
    OwnBox,
    /// Both skeletons by the box enclosing both.
    UnionBox,
    /// Both skeletons by this box (usually the mesh's).
    Box(Aabb),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    /// Points per bone for the bone-to-bone metric, endpoints included.
    pub bone_samples: usize,
    /// Weights above this count as significant.
    pub threshold: f64,
    pub deformation_poses: usize,
    pub normalization: Normalization,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            bone_samples: 32,
            threshold: 1e-4,
            deformation_poses: 10,
            normalization: Normalization::OwnBox,
        }
    }
}

impl MetricConfig {
    /// Default config, normalizing by `mesh`'s box when one is given.
    pub fn for_mesh(mesh: Option<&Mesh>) -> Self {
        let normalization = match mesh.and_then(|m| m.bounding_box()) {
            Some(b) => Normalization::Box(b),
            None => Normalization::OwnBox,
        };
        MetricConfig {
            normalization,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bone_samples < 2 {
            return Err(RigError::arg("bone_samples must be at least 2"));
        }
        if !(self.threshold > 0.0) {
            return Err(RigError::arg("threshold must be positive"));
        }
        if self.deformation_poses == 0 {
            return Err(RigError::arg("deformation_poses must be at least 1"));
        }
        Ok(())
    }
}

pub fn normalize_pair(
    a: &Skeleton,
    b: &Skeleton,
    mode: Normalization,
) -> Result<(Skeleton, Skeleton)> {
    if a.is_empty() || b.is_empty() {
        return Err(RigError::arg("empty skeleton"));
    }
    let (ba, bb) = (a.bounding_box().unwrap(), b.bounding_box().unwrap());
    Ok(match mode {
        Normalization::None => (a.clone(), b.clone()),
        Normalization::OwnBox => (a.normalized_by(&ba), b.normalized_by(&bb)),
        Normalization::UnionBox => {
            let u = ba.union(&bb);
            (a.normalized_by(&u), b.normalized_by(&u))
        }
        Normalization::Box(m) => (a.normalized_by(&m), b.normalized_by(&m)),
    })
}

fn mean_min<P: Sync, Q: Sync>(
    from: &[P],
    to: &[Q],
    dist: impl Fn(&P, &Q) -> f64 + Sync + Send,
) -> f64 {
    let total: f64 = par::map_slice(from, |p| {
        to.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min)
    })
    .iter()
    .sum();
    total / from.len() as f64
}

fn segments(s: &Skeleton) -> Vec<(Vec3, Vec3)> {
    let c = s.joints();
    s.bones().into_iter().map(|(p, k)| (c[p], c[k])).collect()
}

fn need_joints(a: &Skeleton, b: &Skeleton) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(RigError::arg("empty skeleton"));
    }
    Ok(())
}

fn need_bones(a: &Skeleton, b: &Skeleton) -> Result<()> {
    need_joints(a, b)?;
    if a.bone_count() == 0 || b.bone_count() == 0 {
        return Err(RigError::arg("skeleton has no bones"));
    }
    Ok(())
}

/// Mean over joints of `a` of the distance to the nearest joint of `b`.
pub fn directed_j2j(a: &Skeleton, b: &Skeleton) -> f64 {
    mean_min(a.joints(), b.joints(), |p, q| (p - q).norm())
}

/// Mean over joints of `a` of the distance to the nearest bone of `b`.
pub fn directed_j2b(a: &Skeleton, b: &Skeleton) -> f64 {
    mean_min(a.joints(), &segments(b), |p, (s, e)| {
        point_segment_distance(p, s, e)
    })
}

pub fn cd_j2j(a: &Skeleton, b: &Skeleton) -> Result<f64> {
    need_joints(a, b)?;
    Ok(0.5 * (directed_j2j(a, b) + directed_j2j(b, a)))
}

pub fn cd_j2b(a: &Skeleton, b: &Skeleton) -> Result<f64> {
    need_bones(a, b)?;
    Ok(0.5 * (directed_j2b(a, b) + directed_j2b(b, a)))
}

/// `samples` evenly spaced points per bone, both endpoints included.
pub fn sample_bones(s: &Skeleton, samples: usize) -> Vec<Vec3> {
    let n = samples.max(2);
    segments(s)
        .iter()
        .flat_map(|(p, q)| (0..n).map(move |i| p + (q - p) * (i as f64 / (n - 1) as f64)))
        .collect()
}

pub fn cd_b2b(a: &Skeleton, b: &Skeleton, samples: usize) -> Result<f64> {
    need_bones(a, b)?;
    if samples < 2 {
        return Err(RigError::arg("bone samples must be at least 2"));
    }
    let (pa, pb) = (sample_bones(a, samples), sample_bones(b, samples));
    let d = |p: &Vec3, q: &Vec3| (p - q).norm();
    Ok(0.5 * (mean_min(&pa, &pb, d) + mean_min(&pb, &pa, d)))
}

fn check_pair(pred: &SkinWeights, gt: &SkinWeights) -> Result<()> {
    gt.check_shape(pred.vertex_count(), pred.joint_count())?;
    if pred.vertex_count() == 0 {
        return Err(RigError::arg("no vertices"));
    }
    Ok(())
}

/// `(precision, recall)` over entries above `threshold`.
///
/// An empty significant set counts as perfectly matched, so both are 1.0
/// when neither side has significant weights.
pub fn skinning_precision_recall(
    pred: &SkinWeights,
    gt: &SkinWeights,
    threshold: f64,
) -> Result<(f64, f64)> {
    check_pair(pred, gt)?;
    let (mut sp, mut sg, mut both) = (0usize, 0usize, 0usize);
    for (p, g) in pred.as_slice().iter().zip(gt.as_slice()) {
        let (a, b) = (*p > threshold, *g > threshold);
        sp += a as usize;
        sg += b as usize;
        both += (a && b) as usize;
    }
    let ratio = |n: usize, d: usize| if d == 0 { 1.0 } else { n as f64 / d as f64 };
    Ok((ratio(both, sp), ratio(both, sg)))
}

/// Mean over vertices of the row-wise L1 distance.
pub fn skinning_l1(pred: &SkinWeights, gt: &SkinWeights) -> Result<f64> {
    check_pair(pred, gt)?;
    let total: f64 = pred
        .as_slice()
        .iter()
        .zip(gt.as_slice())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(total / pred.vertex_count() as f64)
}

/// Seed of the `i`-th evaluation pose.
pub fn pose_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

pub fn deformation_error(
    m: &Mesh,
    s: &Skeleton,
    pred: &SkinWeights,
    gt: &SkinWeights,
    seed: u64,
) -> Result<f64> {
    deformation_error_with(m, s, pred, gt, seed, 10, &AugmentConfig::default())
}

/// Mean vertex distance between the two skinnings over `poses` sampled poses.
pub fn deformation_error_with(
    m: &Mesh,
    s: &Skeleton,
    pred: &SkinWeights,
    gt: &SkinWeights,
    seed: u64,
    poses: usize,
    augment: &AugmentConfig,
) -> Result<f64> {
    s.ensure_valid()?;
    pred.check_shape(m.vertices.len(), s.len())?;
    gt.check_shape(m.vertices.len(), s.len())?;
    if poses == 0 || m.vertices.is_empty() {
        return Err(RigError::arg("deformation error needs poses and vertices"));
    }
    let mut total = 0.0;
    for i in 0..poses {
        let t = forward_kinematics(
            s,
            &sample_augmented_pose_with(s, pose_seed(seed, i), augment),
        )?;
        let a = linear_blend_skinning(m, s, pred, &t)?;
        let b = linear_blend_skinning(m, s, gt, &t)?;
        total += a.iter().zip(&b).map(|(x, y)| (x - y).norm()).sum::<f64>();
    }
    Ok(total / (poses * m.vertices.len()) as f64)
}

/// Raw metric values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricReport {
    pub cd_j2j: f64,
    pub cd_j2b: f64,
    pub cd_b2b: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub l1: Option<f64>,
    pub deformation_error: Option<f64>,
}

impl MetricReport {
    /// Chamfer values ×100 and precision/recall as percentages.
    pub fn in_reporting_units(&self) -> MetricReport {
        MetricReport {
            cd_j2j: self.cd_j2j * 100.0,
            cd_j2b: self.cd_j2b * 100.0,
            cd_b2b: self.cd_b2b * 100.0,
            precision: self.precision.map(|p| p * 100.0),
            recall: self.recall.map(|r| r * 100.0),
            ..*self
        }
    }
}

/// Normalizes, then computes the chamfer triple and, when weights for both
/// rigs and a mesh are given, the skinning metrics.
pub fn evaluate(
    pred: &Skeleton,
    gt: &Skeleton,
    weights: Option<(&SkinWeights, &SkinWeights)>,
    mesh: Option<&Mesh>,
    cfg: &MetricConfig,
    seed: u64,
) -> Result<MetricReport> {
    cfg.validate()?;
    let (a, b) = normalize_pair(pred, gt, cfg.normalization)?;
    let mut r = MetricReport {
        cd_j2j: cd_j2j(&a, &b)?,
        cd_j2b: cd_j2b(&a, &b)?,
        cd_b2b: cd_b2b(&a, &b, cfg.bone_samples)?,
        ..Default::default()
    };
    if let Some((wp, wg)) = weights {
        let (p, rc) = skinning_precision_recall(wp, wg, cfg.threshold)?;
        r.precision = Some(p);
        r.recall = Some(rc);
        r.l1 = Some(skinning_l1(wp, wg)?);
        if let Some(m) = mesh {
            r.deformation_error = Some(deformation_error_with(
                m,
                gt,
                wp,
                wg,
                seed,
                cfg.deformation_poses,
                &AugmentConfig::default(),
            )?);
        }
    }
    Ok(r)
}
