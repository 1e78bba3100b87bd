// SPDX-License-Identifier: Apache-2.0

//! Independent reference implementations shared by the integration tests and
//! the acceptance suite. Nothing here calls the code it is used to check.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix4, UnitQuaternion, Vector4};
use rigkit::geometry::Camera;
use rigkit::math::{Quat, Vec3};
use rigkit::{Mesh, Pose, Skeleton, SkinWeights};

fn rotation4(q: &Quat) -> Matrix4<f64> {
    UnitQuaternion::new_normalize(*q).to_homogeneous()
}

fn translation4(t: &Vec3) -> Matrix4<f64> {
    Matrix4::new_translation(t)
}

/// Global joint matrices as explicit products along the root-to-joint path.
pub fn fk_path_product(s: &Skeleton, p: &Pose) -> Vec<Matrix4<f64>> {
    let c = s.joints();
    (0..s.len())
        .map(|k| {
            let mut path = vec![k];
            while let Some(par) = s.parents()[*path.last().unwrap()] {
                path.push(par);
            }
            path.reverse();
            let mut m = Matrix4::identity();
            for &j in &path {
                let local =
                    translation4(&c[j]) * rotation4(&p.joint_rotations[j]) * translation4(&-c[j]);
                if s.parents()[j].is_none() {
                    m = translation4(&p.root_translation)
                        * translation4(&c[j])
                        * rotation4(&p.root_rotation)
                        * translation4(&-c[j])
                        * local;
                } else {
                    m *= local;
                }
            }
            m
        })
        .collect()
}

pub fn transform_point(m: &Matrix4<f64>, x: &Vec3) -> Vec3 {
    let h = m * Vector4::new(x.x, x.y, x.z, 1.0);
    Vec3::new(h.x, h.y, h.z)
}

/// Weighted sum of transformed rest vertices, one loop per vertex and joint.
pub fn lbs_naive(vertices: &[Vec3], w: &SkinWeights, mats: &[Matrix4<f64>]) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(vertices.len());
    for (v, x) in vertices.iter().enumerate() {
        let mut acc = Vec3::zeros();
        for (k, m) in mats.iter().enumerate() {
            acc += transform_point(m, x) * w.get(v, k);
        }
        out.push(acc);
    }
    out
}

pub fn j2j_brute(a: &Skeleton, b: &Skeleton) -> f64 {
    let directed = |x: &Skeleton, y: &Skeleton| {
        let mut total = 0.0;
        for p in x.joints() {
            let mut best = f64::INFINITY;
            for q in y.joints() {
                best = best.min((p - q).norm());
            }
            total += best;
        }
        total / x.len() as f64
    };
    0.5 * (directed(a, b) + directed(b, a))
}

/// Points spaced `n` per bone, endpoints included.
pub fn dense_bone_points(s: &Skeleton, n: usize) -> Vec<Vec3> {
    let c = s.joints();
    let mut out = Vec::new();
    for (k, par) in s.parents().iter().enumerate() {
        if let Some(p) = *par {
            for i in 0..n {
                let t = i as f64 / (n - 1) as f64;
                out.push(c[p] * (1.0 - t) + c[k] * t);
            }
        }
    }
    out
}

fn mean_nearest(from: &[Vec3], to: &[Vec3]) -> f64 {
    from.iter()
        .map(|p| {
            to.iter()
                .map(|q| (p - q).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .sum::<f64>()
        / from.len() as f64
}

/// Joint-to-bone chamfer with bones replaced by dense point sets.
pub fn j2b_dense(a: &Skeleton, b: &Skeleton, n: usize) -> f64 {
    0.5 * (mean_nearest(a.joints(), &dense_bone_points(b, n))
        + mean_nearest(b.joints(), &dense_bone_points(a, n)))
}

pub fn b2b_dense(a: &Skeleton, b: &Skeleton, n: usize) -> f64 {
    let (pa, pb) = (dense_bone_points(a, n), dense_bone_points(b, n));
    0.5 * (mean_nearest(&pa, &pb) + mean_nearest(&pb, &pa))
}

pub fn precision_recall_ref(pred: &SkinWeights, gt: &SkinWeights, thr: f64) -> (f64, f64) {
    let mut sp = Vec::new();
    let mut sg = Vec::new();
    for v in 0..pred.vertex_count() {
        for k in 0..pred.joint_count() {
            if pred.get(v, k) > thr {
                sp.push((v, k));
            }
            if gt.get(v, k) > thr {
                sg.push((v, k));
            }
        }
    }
    let inter = sp.iter().filter(|e| sg.contains(e)).count() as f64;
    let p = if sp.is_empty() {
        1.0
    } else {
        inter / sp.len() as f64
    };
    let r = if sg.is_empty() {
        1.0
    } else {
        inter / sg.len() as f64
    };
    (p, r)
}

pub fn l1_ref(pred: &SkinWeights, gt: &SkinWeights) -> f64 {
    let mut total = 0.0;
    for v in 0..pred.vertex_count() {
        for k in 0..pred.joint_count() {
            total += (pred.get(v, k) - gt.get(v, k)).abs();
        }
    }
    total / pred.vertex_count() as f64
}

/// Mean vertex distance between two weight sets over the given poses.
pub fn deformation_error_ref(
    m: &Mesh,
    s: &Skeleton,
    pred: &SkinWeights,
    gt: &SkinWeights,
    poses: &[Pose],
) -> f64 {
    let mut total = 0.0;
    for p in poses {
        let mats = fk_path_product(s, p);
        let a = lbs_naive(&m.vertices, pred, &mats);
        let b = lbs_naive(&m.vertices, gt, &mats);
        for (x, y) in a.iter().zip(&b) {
            total += (x - y).norm();
        }
    }
    total / (poses.len() * m.vertices.len()) as f64
}

/// Single-head attention written out with explicit loops.
pub fn attention_naive(
    q: &DMatrix<f64>,
    k: &DMatrix<f64>,
    v: &DMatrix<f64>,
    bias: Option<&DMatrix<f64>>,
) -> DMatrix<f64> {
    let (n, d) = q.shape();
    let mut out = DMatrix::zeros(n, v.ncols());
    for i in 0..n {
        let mut logits = vec![0.0; n];
        for (j, l) in logits.iter_mut().enumerate() {
            let mut dot = 0.0;
            for c in 0..d {
                dot += q[(i, c)] * k[(j, c)];
            }
            *l = dot / (d as f64).sqrt() + bias.map_or(0.0, |b| b[(i, j)]);
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = e.iter().sum();
        for j in 0..n {
            for c in 0..v.ncols() {
                out[(i, c)] += e[j] / z * v[(j, c)];
            }
        }
    }
    out
}

/// Convex-mesh vertex visibility: some incident face is front-facing.
pub fn convex_vertex_visibility(m: &Mesh, eye: &Vec3) -> Vec<bool> {
    let mut vis = vec![false; m.vertices.len()];
    for t in &m.triangles {
        let [a, b, c] = [m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]];
        let n = (b - a).cross(&(c - a));
        if n.dot(&(eye - a)) > 0.0 {
            for &i in t {
                vis[i] = true;
            }
        }
    }
    vis
}

/// Number of sphere crossings on the open segment `eye → p` for a sphere of
/// `radius` at the origin.
pub fn sphere_crossings(eye: &Vec3, p: &Vec3, radius: f64) -> usize {
    let d = p - eye;
    let (a, b, c) = (d.dot(&d), 2.0 * eye.dot(&d), eye.dot(eye) - radius * radius);
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return 0;
    }
    let r = disc.sqrt();
    [(-b - r) / (2.0 * a), (-b + r) / (2.0 * a)]
        .iter()
        .filter(|&&t| t > 0.0 && t <= 1.0)
        .count()
}

/// Crossings of the axis-aligned box `[-h, h]³` on the segment `eye → p`.
pub fn box_crossings(eye: &Vec3, p: &Vec3, h: f64) -> usize {
    let d = p - eye;
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for a in 0..3 {
        let lo = (-h - eye[a]) / d[a];
        let hi = (h - eye[a]) / d[a];
        t0 = t0.max(lo.min(hi));
        t1 = t1.min(lo.max(hi));
    }
    if t0 >= t1 {
        return 0;
    }
    [t0, t1].iter().filter(|&&t| t > 0.0 && t <= 1.0).count()
}

/// Minimal z-buffer: per pixel, camera-space depth and the id of the nearest
/// triangle, with perspective-correct interpolation of `1/z`.
pub fn zbuffer(m: &Mesh, cam: &Camera, width: usize, height: usize) -> (Vec<f64>, Vec<usize>) {
    let sx = width as f64 / cam.width as f64;
    let sy = height as f64 / cam.height as f64;
    let proj: Vec<Option<(f64, f64, f64)>> = m
        .vertices
        .iter()
        .map(|v| {
            let c = cam.rotation * v + cam.translation;
            (c.z > 1e-9).then(|| {
                (
                    (cam.fx * c.x / c.z + cam.cx) * sx,
                    (cam.fy * c.y / c.z + cam.cy) * sy,
                    c.z,
                )
            })
        })
        .collect();
    let mut z = vec![f64::INFINITY; width * height];
    let mut id = vec![usize::MAX; width * height];
    for (ti, t) in m.triangles.iter().enumerate() {
        let (Some(a), Some(b), Some(c)) = (proj[t[0]], proj[t[1]], proj[t[2]]) else {
            continue;
        };
        let area = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
        if area == 0.0 {
            continue;
        }
        let x0 = a.0.min(b.0).min(c.0).floor().max(0.0) as usize;
        let x1 = (a.0.max(b.0).max(c.0).ceil().max(0.0) as usize).min(width - 1);
        let y0 = a.1.min(b.1).min(c.1).floor().max(0.0) as usize;
        let y1 = (a.1.max(b.1).max(c.1).ceil().max(0.0) as usize).min(height - 1);
        for py in y0..=y1 {
            for px in x0..=x1 {
                let (x, y) = (px as f64 + 0.5, py as f64 + 0.5);
                let w0 = ((b.0 - x) * (c.1 - y) - (b.1 - y) * (c.0 - x)) / area;
                let w1 = ((c.0 - x) * (a.1 - y) - (c.1 - y) * (a.0 - x)) / area;
                let w2 = 1.0 - w0 - w1;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let depth = 1.0 / (w0 / a.2 + w1 / b.2 + w2 / c.2);
                let cell = py * width + px;
                if depth < z[cell] {
                    z[cell] = depth;
                    id[cell] = ti;
                }
            }
        }
    }
    (z, id)
}

/// Vertex visibility read off the rasterized face-id buffer: a vertex is
/// visible when a pixel of its 3×3 block shows an incident triangle, or its
/// depth is within `tol` of the nearest surface there.
pub fn zbuffer_vertex_visibility(m: &Mesh, cam: &Camera, res: usize, tol: f64) -> Vec<bool> {
    let (z, id) = zbuffer(m, cam, res, res);
    let s = res as f64 / cam.width as f64;
    m.vertices
        .iter()
        .enumerate()
        .map(|(vi, v)| {
            let c = cam.rotation * v + cam.translation;
            if c.z <= 1e-9 {
                return false;
            }
            let px = ((cam.fx * c.x / c.z + cam.cx) * s).floor() as i64;
            let py = ((cam.fy * c.y / c.z + cam.cy) * s).floor() as i64;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (x, y) = (px + dx, py + dy);
                    if x < 0 || y < 0 || x as usize >= res || y as usize >= res {
                        continue;
                    }
                    let cell = y as usize * res + x as usize;
                    if id[cell] == usize::MAX {
                        continue;
                    }
                    if m.triangles[id[cell]].contains(&vi) || c.z <= z[cell] + tol {
                        return true;
                    }
                }
            }
            false
        })
        .collect()
}
