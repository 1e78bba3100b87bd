// SPDX-License-Identifier: Apache-2.0

//! Central finite-difference gradient checks and the kernel check suite.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::animate::{
    objective, smoothness_regularizer, tracking_loss, AnimParams, OptimizerConfig, Rig,
    SmoothnessWeights, TrackSet,
};
use crate::fixtures::random_limb_skeleton;
use crate::geometry::Camera;
use crate::kernels::{
    distance_embedding, distance_embedding_backward, next_token_cross_entropy,
    next_token_cross_entropy_backward, skinning_head, skinning_head_backward, taja_attention,
    taja_attention_backward, AttentionInputs, DistanceBias, DistanceEmbeddingTable,
};
use crate::math::{normalize_quat, Quat, Vec3};
use crate::mesh::Mesh;
use crate::par;
use crate::pose::Pose;
use crate::weights::SkinWeights;

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    /// Largest `|a − n| / max(|a|, |n|, floor)` over entries, where the floor
    /// is `1e-3 · max |n|` (and at least `1e-8`).
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub entries: usize,
}

impl GradCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_rel_error < tol
    }
}

pub fn numeric_gradient<F>(f: &F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    par::map_range(x.len(), |i| {
        let mut xp = x.to_vec();
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        (fp - fm) / (2.0 * h)
    })
}

pub fn compare(analytic: &[f64], numeric: &[f64]) -> GradCheck {
    assert_eq!(analytic.len(), numeric.len());
    let scale = numeric.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = (1e-3 * scale).max(1e-8);
    let mut out = GradCheck {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        entries: analytic.len(),
    };
    for (a, n) in analytic.iter().zip(numeric) {
        let abs = (a - n).abs();
        let rel = abs / a.abs().max(n.abs()).max(floor);
        out.max_abs_error = out.max_abs_error.max(abs);
        out.max_rel_error = out.max_rel_error.max(rel);
    }
    out
}

pub fn check_gradient<F>(f: F, x: &[f64], analytic: &[f64], h: f64) -> GradCheck
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    compare(analytic, &numeric_gradient(&f, x, h))
}

fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize, s: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-s..s))
}

fn take(x: &[f64], at: &mut usize, r: usize, c: usize) -> DMatrix<f64> {
    let m = DMatrix::from_row_slice(r, c, &x[*at..*at + r * c]);
    *at += r * c;
    m
}

fn push(out: &mut Vec<f64>, m: &DMatrix<f64>) {
    out.extend(m.transpose().iter());
}

/// Attention on a random 6-joint tree, `d_k = 4`, two heads. Parameters are
/// Q, K, V per head, λ, and the distance table.
pub fn check_taja(seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (j, dk, heads, levels) = (6, 4, 2, 16);
    let d = random_limb_skeleton(seed, j)
        .graph_distance_matrix()
        .expect("valid tree");
    let mut x = Vec::new();
    for _ in 0..3 * heads {
        push(&mut x, &rand_mat(&mut rng, j, dk, 1.0));
    }
    x.push(rng.random_range(-1.5..1.5));
    x.extend((0..(levels + 1) * heads).map(|_| rng.random_range(-1.0..1.0)));
    let gout: Vec<DMatrix<f64>> = (0..heads).map(|_| rand_mat(&mut rng, j, dk, 1.0)).collect();

    let unpack = |x: &[f64]| {
        let mut at = 0;
        let mut mats: Vec<DMatrix<f64>> = (0..3 * heads).map(|_| take(x, &mut at, j, dk)).collect();
        let lambda = x[at];
        let table = DistanceEmbeddingTable::from_values(levels, heads, x[at + 1..].to_vec())
            .expect("sized");
        let v = mats.split_off(2 * heads);
        let k = mats.split_off(heads);
        let inp = AttentionInputs {
            q: mats,
            k,
            v,
            bias: distance_embedding(&d, &table),
            lambda,
        };
        (inp, table)
    };
    let f = |x: &[f64]| {
        let (inp, _) = unpack(x);
        let out = taja_attention(&inp).expect("finite");
        out.output
            .iter()
            .zip(&gout)
            .map(|(o, g)| o.component_mul(g).sum())
            .sum::<f64>()
    };
    let (inp, table) = unpack(&x);
    let out = taja_attention(&inp).expect("finite");
    let g = taja_attention_backward(&inp, &out, &gout);
    let mut analytic = Vec::with_capacity(x.len());
    for set in [&g.q, &g.k, &g.v] {
        for m in set {
            push(&mut analytic, m);
        }
    }
    analytic.push(g.lambda);
    analytic.extend(distance_embedding_backward(
        &d,
        &DistanceBias {
            heads: g.bias.heads,
        },
        &table,
    ));
    check_gradient(f, &x, &analytic, FD_STEP)
}

/// Skinning head with `n = 10`, `d = 8`, `j = 5`.
pub fn check_skinning_head(seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, d, j) = (10, 8, 5);
    let mut x = Vec::new();
    push(&mut x, &rand_mat(&mut rng, n, d, 1.0));
    push(&mut x, &rand_mat(&mut rng, j, d, 1.0));
    x.push(rng.random_range(0.5..8.0));
    let gw = rand_mat(&mut rng, n, j, 1.0);
    let unpack = |x: &[f64]| {
        let mut at = 0;
        let fp = take(x, &mut at, n, d);
        let fb = take(x, &mut at, j, d);
        (fp, fb, x[at])
    };
    let f = |x: &[f64]| {
        let (fp, fb, a) = unpack(x);
        skinning_head(&fp, &fb, a)
            .expect("finite")
            .component_mul(&gw)
            .sum()
    };
    let (fp, fb, a) = unpack(&x);
    let g = skinning_head_backward(&fp, &fb, a, &gw).expect("finite");
    let mut analytic = Vec::new();
    push(&mut analytic, &g.point_features);
    push(&mut analytic, &g.bone_features);
    analytic.push(g.alpha);
    check_gradient(f, &x, &analytic, FD_STEP)
}

/// Cross-entropy over a 12 × 203 logit block with a random mask.
pub fn check_cross_entropy(seed: u64) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l, v) = (12, crate::codec::vocab::VOCAB_SIZE);
    let mut x = Vec::new();
    push(&mut x, &rand_mat(&mut rng, l, v, 3.0));
    let targets: Vec<usize> = (0..l).map(|_| rng.random_range(0..v)).collect();
    let mut mask: Vec<bool> = (0..l).map(|_| rng.random_bool(0.75)).collect();
    mask[0] = true;
    let f = |x: &[f64]| {
        next_token_cross_entropy(&DMatrix::from_row_slice(l, v, x), &targets, &mask).expect("valid")
    };
    let g = next_token_cross_entropy_backward(&DMatrix::from_row_slice(l, v, &x), &targets, &mask)
        .expect("valid");
    let mut analytic = Vec::new();
    push(&mut analytic, &g);
    check_gradient(f, &x, &analytic, FD_STEP)
}

/// Small random scene for loss gradient checks: a limb skeleton, random
/// vertices with random convex weights, a camera in front, and tracks near
/// (but not at) the current projections.
pub fn random_scene(
    seed: u64,
    joints: usize,
    vertices: usize,
    frames: usize,
) -> (Rig, TrackSet, AnimParams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_limb_skeleton(seed, joints);
    let verts: Vec<Vec3> = (0..vertices)
        .map(|_| Vec3::from_fn(|_, _| rng.random_range(-0.4..0.4)))
        .collect();
    let mut w = Vec::with_capacity(vertices * joints);
    for _ in 0..vertices {
        let row: Vec<f64> = (0..joints)
            .map(|_| {
                if rng.random_bool(0.6) {
                    rng.random_range(0.0..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let sum: f64 = row.iter().sum();
        if sum == 0.0 {
            let k = rng.random_range(0..joints);
            w.extend((0..joints).map(|i| (i == k) as u8 as f64));
        } else {
            w.extend(row.iter().map(|x| x / sum));
        }
    }
    let rig = Rig::new(
        s,
        Mesh::new(verts, vec![]),
        SkinWeights::from_flat(vertices, joints, w).expect("sized"),
    )
    .expect("valid rig");
    let cam = Camera::look_at(
        &Vec3::new(0.3, -0.4, -2.5),
        &Vec3::zeros(),
        &Vec3::y(),
        400.0,
        256,
        256,
    )
    .expect("camera");
    let mut params = AnimParams::identity(frames, joints);
    let rand_quat = |rng: &mut ChaCha8Rng, s: f64| {
        normalize_quat(&Quat::new(
            1.0,
            rng.random_range(-s..s),
            rng.random_range(-s..s),
            rng.random_range(-s..s),
        ))
    };
    for f in &mut params.frames[1..] {
        *f = Pose {
            root_rotation: rand_quat(&mut rng, 0.3),
            root_translation: Vec3::from_fn(|_, _| rng.random_range(-0.1..0.1)),
            joint_rotations: (0..joints).map(|_| rand_quat(&mut rng, 0.5)).collect(),
        };
    }
    let jitter = |rng: &mut ChaCha8Rng| {
        [
            rng.random_range(180.0..260.0) - 100.0,
            rng.random_range(80.0..160.0),
        ]
    };
    let tracks = TrackSet {
        camera: cam,
        joint_tracks: (0..frames)
            .map(|_| (0..joints).map(|_| jitter(&mut rng)).collect())
            .collect(),
        vertex_tracks: (0..frames)
            .map(|_| (0..vertices).map(|_| jitter(&mut rng)).collect())
            .collect(),
        vertex_subset: (0..vertices).collect(),
        joint_visibility: (0..joints).map(|_| rng.random_bool(0.8)).collect(),
        vertex_visibility: (0..vertices).map(|_| rng.random_bool(0.8)).collect(),
    };
    (rig, tracks, params)
}

/// Tracking loss on a random scene with `j = 6`, `V_s = 20`, `n = 5`.
pub fn check_tracking_loss(seed: u64) -> GradCheck {
    let (rig, tracks, params) = random_scene(seed, 6, 20, 5);
    let f = |x: &[f64]| {
        let mut p = params.clone();
        p.set_flat(x);
        tracking_loss(&p, &rig, &tracks).expect("valid").value
    };
    let analytic = tracking_loss(&params, &rig, &tracks).expect("valid").grad;
    check_gradient(f, &params.to_flat(), &analytic, FD_STEP)
}

/// Smoothness regularizer on random parameters with `j = 6`, `n = 5`.
pub fn check_smoothness(seed: u64) -> GradCheck {
    let (_, _, params) = random_scene(seed, 6, 1, 5);
    let w = SmoothnessWeights {
        rotation: 1.0,
        translation: 0.7,
    };
    let f = |x: &[f64]| {
        let mut p = params.clone();
        p.set_flat(x);
        smoothness_regularizer(&p, &w).0
    };
    let analytic = smoothness_regularizer(&params, &w).1;
    check_gradient(f, &params.to_flat(), &analytic, FD_STEP)
}

/// Full optimizer objective on a scene with `j = 8`, `V_s = 30`, `n = 6`.
pub fn check_objective(seed: u64) -> GradCheck {
    let (rig, tracks, params) = random_scene(seed, 8, 30, 6);
    let cfg = OptimizerConfig {
        lambda_reg: 0.5,
        ..Default::default()
    };
    let f = |x: &[f64]| {
        let mut p = params.clone();
        p.set_flat(x);
        objective(&p, &rig, &tracks, &cfg).expect("valid").value
    };
    let analytic = objective(&params, &rig, &tracks, &cfg).expect("valid").grad;
    check_gradient(f, &params.to_flat(), &analytic, FD_STEP)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub name: &'static str,
    pub instances: usize,
    pub max_rel_error: f64,
    pub passed: bool,
}

pub type Checker = fn(u64) -> GradCheck;

pub const SUITE: [(&str, Checker); 6] = [
    ("taja_attention", check_taja),
    ("skinning_head", check_skinning_head),
    ("next_token_cross_entropy", check_cross_entropy),
    ("tracking_loss", check_tracking_loss),
    ("smoothness_regularizer", check_smoothness),
    ("animation_objective", check_objective),
];

/// Runs every checker on `instances` seeds starting at `seed`.
pub fn run_suite(seed: u64, instances: usize) -> Vec<SuiteRow> {
    SUITE
        .iter()
        .map(|&(name, check)| {
            let worst = (0..instances as u64)
                .map(|i| check(seed.wrapping_add(i)).max_rel_error)
                .fold(0.0f64, f64::max);
            SuiteRow {
                name,
                instances,
                max_rel_error: worst,
                passed: worst < FD_TOLERANCE,
            }
        })
        .collect()
}
