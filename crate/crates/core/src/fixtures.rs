// SPDX-License-Identifier: Apache-2.0

//! Deterministic synthetic rigs and closed meshes for tests, benchmarks and
//! CLI demos.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::animate::AnimParams;
use crate::deform::{heuristic_skin_weights, sample_augmented_pose_with, AugmentConfig};
use crate::geometry::Camera;
use crate::math::{clamp_rotation, identity_quat, slerp, Vec3};
use crate::mesh::Mesh;
use crate::pose::Pose;
use crate::skeleton::Skeleton;
use crate::weights::SkinWeights;

/// Random tree with `joints` joints: joint `k > 0` picks a parent in `0..k`
/// and positions are uniform in `[-0.5, 0.5)³`.
pub fn random_skeleton(seed: u64, joints: usize) -> Skeleton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos = (0..joints)
        .map(|_| {
            Vec3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            )
        })
        .collect();
    let parents = (0..joints)
        .map(|k| {
            if k == 0 {
                None
            } else {
                Some(rng.random_range(0..k))
            }
        })
        .collect();
    Skeleton::new(pos, parents)
}

/// Random tree where each child sits a short random offset from its parent,
/// closer to what real rigs look like than [`random_skeleton`].
pub fn random_limb_skeleton(seed: u64, joints: usize) -> Skeleton {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<Vec3> = Vec::with_capacity(joints);
    let mut parents = Vec::with_capacity(joints);
    for k in 0..joints {
        if k == 0 {
            pos.push(Vec3::zeros());
            parents.push(None);
            continue;
        }
        let p = rng.random_range(0..k);
        let dir = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let dir = if dir.norm() < 1e-3 {
            Vec3::y()
        } else {
            dir.normalize()
        };
        pos.push(pos[p] + dir * rng.random_range(0.1..0.3));
        parents.push(Some(p));
    }
    Skeleton::new(pos, parents)
}

/// Axis-aligned closed cube centred at the origin, outward winding.
pub fn cube_mesh(size: f64) -> Mesh {
    let h = size / 2.0;
    let v = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -h } else { h },
                if i & 2 == 0 { -h } else { h },
                if i & 4 == 0 { -h } else { h },
            )
        })
        .collect();
    let tris = vec![
        [0, 2, 1],
        [1, 2, 3], // -z
        [4, 5, 6],
        [5, 7, 6], // +z
        [0, 1, 4],
        [1, 5, 4], // -y
        [2, 6, 3],
        [3, 6, 7], // +y
        [0, 4, 2],
        [2, 4, 6], // -x
        [1, 3, 5],
        [3, 7, 5], // +x
    ];
    Mesh::new(v, tris)
}

/// Closed latitude/longitude sphere with poles, outward winding.
pub fn uv_sphere(segments: usize, rings: usize, radius: f64) -> Mesh {
    assert!(segments >= 3 && rings >= 2);
    let mut v = vec![Vec3::new(0.0, 0.0, radius)];
    for r in 1..rings {
        let theta = std::f64::consts::PI * r as f64 / rings as f64;
        for s in 0..segments {
            let phi = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
            v.push(
                radius
                    * Vec3::new(
                        theta.sin() * phi.cos(),
                        theta.sin() * phi.sin(),
                        theta.cos(),
                    ),
            );
        }
    }
    v.push(Vec3::new(0.0, 0.0, -radius));
    let south = v.len() - 1;
    let idx = |r: usize, s: usize| 1 + (r - 1) * segments + (s % segments);
    let mut t = Vec::new();
    for s in 0..segments {
        t.push([0, idx(1, s), idx(1, s + 1)]);
    }
    for r in 1..rings - 1 {
        for s in 0..segments {
            let (a, b, c, d) = (idx(r, s), idx(r, s + 1), idx(r + 1, s), idx(r + 1, s + 1));
            t.push([a, c, b]);
            t.push([b, c, d]);
        }
    }
    for s in 0..segments {
        t.push([south, idx(rings - 1, s + 1), idx(rings - 1, s)]);
    }
    Mesh::new(v, t)
}

/// Subdivided icosahedron projected onto a sphere of `radius`.
pub fn icosphere(subdivisions: usize, radius: f64) -> Mesh {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<Vec3> = [
        (-1.0, p, 0.0),
        (1.0, p, 0.0),
        (-1.0, -p, 0.0),
        (1.0, -p, 0.0),
        (0.0, -1.0, p),
        (0.0, 1.0, p),
        (0.0, -1.0, -p),
        (0.0, 1.0, -p),
        (p, 0.0, -1.0),
        (p, 0.0, 1.0),
        (-p, 0.0, -1.0),
        (-p, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut t: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, v: &mut Vec<Vec3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                v.push(((v[a] + v[b]) * 0.5).normalize());
                v.len() - 1
            })
        };
        let mut next = Vec::with_capacity(t.len() * 4);
        for &[a, b, c] in &t {
            let ab = midpoint(a, b, &mut v);
            let bc = midpoint(b, c, &mut v);
            let ca = midpoint(c, a, &mut v);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        t = next;
    }
    Mesh::new(v.into_iter().map(|p| p * radius).collect(), t)
}

/// Star-shaped closed mesh: an icosphere with smooth random radial bumps.
pub fn random_closed_mesh(seed: u64, subdivisions: usize) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = icosphere(subdivisions, 1.0);
    let waves: Vec<(Vec3, f64, f64)> = (0..4)
        .map(|_| {
            let d = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            (d, rng.random_range(1.0..3.0), rng.random_range(0.05..0.2))
        })
        .collect();
    let scale = Vec3::new(
        rng.random_range(0.2..0.4),
        rng.random_range(0.2..0.4),
        rng.random_range(0.2..0.4),
    );
    base.map_vertices(|p| {
        let r = 1.0
            + waves
                .iter()
                .map(|(d, f, a)| a * (f * d.dot(p)).sin())
                .sum::<f64>();
        (p * r).component_mul(&scale)
    })
}

/// Closed capped tube around the segment `a → b`.
pub fn tube(a: &Vec3, b: &Vec3, radius: f64, rings: usize, segments: usize) -> Mesh {
    assert!(rings >= 2 && segments >= 3);
    let axis = b - a;
    let dir = axis.normalize();
    let helper = if dir.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let u = dir.cross(&helper).normalize();
    let w = dir.cross(&u);
    let mut v = vec![*a];
    for r in 0..rings {
        let c = a + axis * (r as f64 / (rings - 1) as f64);
        for s in 0..segments {
            let phi = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
            v.push(c + radius * (u * phi.cos() + w * phi.sin()));
        }
    }
    v.push(*b);
    let end = v.len() - 1;
    let idx = |r: usize, s: usize| 1 + r * segments + (s % segments);
    let mut t = Vec::new();
    for s in 0..segments {
        t.push([0, idx(0, s + 1), idx(0, s)]);
    }
    for r in 0..rings - 1 {
        for s in 0..segments {
            let (p, q, x, y) = (idx(r, s), idx(r, s + 1), idx(r + 1, s), idx(r + 1, s + 1));
            t.push([p, q, x]);
            t.push([q, y, x]);
        }
    }
    for s in 0..segments {
        t.push([end, idx(rings - 1, s), idx(rings - 1, s + 1)]);
    }
    Mesh::new(v, t)
}

/// Concatenates meshes into one vertex/triangle list.
pub fn merge_meshes(parts: &[Mesh]) -> Mesh {
    let mut out = Mesh::default();
    for m in parts {
        let base = out.vertices.len();
        out.vertices.extend_from_slice(&m.vertices);
        out.triangles.extend(
            m.triangles
                .iter()
                .map(|t| [t[0] + base, t[1] + base, t[2] + base]),
        );
    }
    out
}

/// One closed tube per bone. Tubes are trimmed by `trim` (fraction of the
/// bone length) at both ends so joints sit in the gaps between tubes.
pub fn tube_rig_mesh(s: &Skeleton, radius: f64, trim: f64, rings: usize, segments: usize) -> Mesh {
    let j = s.joints();
    let parts: Vec<Mesh> = s
        .bones()
        .into_iter()
        .map(|(p, c)| {
            let d = j[c] - j[p];
            tube(
                &(j[p] + d * trim),
                &(j[c] - d * trim),
                radius,
                rings,
                segments,
            )
        })
        .collect();
    merge_meshes(&parts)
}

/// Ten-joint quadruped-like skeleton: spine of three, neck and head, four
/// single-segment legs, and a tail.
pub fn creature_skeleton() -> Skeleton {
    let joints = vec![
        Vec3::new(0.0, 0.0, 0.0),       // 0 pelvis
        Vec3::new(0.18, 0.02, 0.0),     // 1 chest
        Vec3::new(0.30, 0.12, 0.0),     // 2 neck
        Vec3::new(0.40, 0.16, 0.02),    // 3 head
        Vec3::new(0.18, -0.20, 0.09),   // 4 front leg L
        Vec3::new(0.18, -0.20, -0.09),  // 5 front leg R
        Vec3::new(-0.02, -0.20, 0.09),  // 6 hind leg L
        Vec3::new(-0.02, -0.20, -0.09), // 7 hind leg R
        Vec3::new(-0.16, 0.05, 0.0),    // 8 tail base
        Vec3::new(-0.32, 0.12, 0.0),    // 9 tail tip
    ];
    let parents = vec![
        None,
        Some(0),
        Some(1),
        Some(2),
        Some(1),
        Some(1),
        Some(0),
        Some(0),
        Some(0),
        Some(8),
    ];
    Skeleton::new(joints, parents)
}

/// The creature skeleton with a tube mesh of ~2000 vertices and heuristic
/// weights. Each leaf gets an extra end segment (head, feet, tail tip) so
/// every joint carries skin.
pub fn creature_rig() -> (Skeleton, Mesh, SkinWeights) {
    let s = creature_skeleton();
    let j = s.len();
    let c = s.joints();
    let children = s.children();
    let mut joints = c.to_vec();
    let mut parents = s.parents().to_vec();
    for k in 0..j {
        if let (Some(p), true) = (s.parents()[k], children[k].is_empty()) {
            joints.push(c[k] + (c[k] - c[p]) * 0.4);
            parents.push(Some(k));
        }
    }
    let extended = Skeleton::new(joints, parents);
    let mesh = tube_rig_mesh(&extended, 0.03, 0.05, 11, 12);
    let wide = heuristic_skin_weights(&mesh, &extended, 2, 0.02).expect("valid rig");
    let data = wide.rows().flat_map(|r| r[..j].to_vec()).collect();
    let w = SkinWeights::from_flat(mesh.vertices.len(), j, data).expect("sized");
    (s, mesh, w)
}

/// Smooth motion: `keyframes` seeded augmented poses (every joint perturbed,
/// clamped to `max_angle_deg`) slerped over `frames` frames. Frame 0 and the
/// first keyframe are the rest pose; the root stays put.
pub fn smooth_motion(
    s: &Skeleton,
    frames: usize,
    keyframes: usize,
    seed: u64,
    max_angle_deg: f64,
) -> AnimParams {
    let j = s.len();
    let cfg = AugmentConfig {
        probability: 1.0,
        max_angle_deg: 60.0,
    };
    let limit = max_angle_deg.to_radians();
    let mut keys = vec![Pose::identity(j)];
    for k in 1..keyframes.max(2) {
        let mut p = sample_augmented_pose_with(s, seed.wrapping_add(k as u64), &cfg);
        for q in &mut p.joint_rotations {
            *q = clamp_rotation(q, limit);
        }
        keys.push(p);
    }
    let spans = keys.len() - 1;
    let mut out = Vec::with_capacity(frames);
    for i in 0..frames {
        if i == 0 {
            out.push(Pose::identity(j));
            continue;
        }
        let t = i as f64 / (frames - 1).max(1) as f64 * spans as f64;
        let k = (t.floor() as usize).min(spans - 1);
        let f = t - k as f64;
        let (a, b) = (&keys[k], &keys[k + 1]);
        out.push(Pose {
            root_rotation: identity_quat(),
            root_translation: Vec3::zeros(),
            joint_rotations: (0..j)
                .map(|q| slerp(&a.joint_rotations[q], &b.joint_rotations[q], f))
                .collect(),
        });
    }
    AnimParams { frames: out }
}

/// Oblique 512² view of [`creature_rig`].
pub fn creature_camera() -> Camera {
    Camera::look_at(
        &Vec3::new(0.8, 0.9, -1.6),
        &Vec3::new(0.04, -0.02, 0.0),
        &Vec3::y(),
        600.0,
        512,
        512,
    )
    .expect("valid camera")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_meshes_are_closed() {
        assert!(cube_mesh(1.0).is_closed());
        assert!(uv_sphere(12, 6, 1.0).is_closed());
        assert!(icosphere(2, 1.0).is_closed());
        assert!(random_closed_mesh(3, 2).is_closed());
        assert!(tube(&Vec3::zeros(), &Vec3::x(), 0.1, 4, 8).is_closed());
        let rig = tube_rig_mesh(&creature_skeleton(), 0.03, 0.1, 6, 10);
        assert!(rig.is_closed());
        assert!(rig.validate().is_valid());
    }

    #[test]
    fn outward_winding() {
        for m in [cube_mesh(1.0), uv_sphere(12, 6, 1.0), icosphere(1, 1.0)] {
            for t in 0..m.triangles.len() {
                let [a, b, c] = m.triangle(t);
                let centroid = (a + b + c) / 3.0;
                assert!(m.face_normal(t).dot(&centroid) > 0.0);
            }
        }
        let tb = tube(&Vec3::zeros(), &Vec3::x(), 0.1, 3, 8);
        let mid = Vec3::new(0.5, 0.0, 0.0);
        for t in 0..tb.triangles.len() {
            let [a, b, c] = tb.triangle(t);
            assert!(tb.face_normal(t).dot(&((a + b + c) / 3.0 - mid)) > 0.0);
        }
    }

    #[test]
    fn random_skeletons_are_valid() {
        for seed in 0..100 {
            assert!(random_skeleton(seed, 20).validate().is_valid());
            assert!(random_limb_skeleton(seed, 20).validate().is_valid());
        }
        assert!(creature_skeleton().validate().is_valid());
    }
}
