// SPDX-License-Identifier: Apache-2.0

//! Acceptance harness: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigkit::animate::*;
use rigkit::codec::*;
use rigkit::deform::*;
use rigkit::fixtures::*;
use rigkit::geometry::{write_obj, Camera};
use rigkit::gradcheck::run_suite;
use rigkit::io::{animation_to_json, camera_to_json, rig_to_json};
use rigkit::kernels::*;
use rigkit::math::{quat_from_axis_angle, Vec3};
use rigkit::metrics::*;
use rigkit::{Mesh, Pose, Skeleton, SkinWeights};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<f64, String> {
    let t = start.elapsed();
    ensure!(
        t < limit,
        "{what} took {:.1} s, limit {} s",
        t.as_secs_f64(),
        limit.as_secs()
    );
    Ok(t.as_secs_f64())
}

fn rigkit_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rigkit"))
        .args(args)
        .output()
        .expect("rigkit binary runs")
}

fn s(p: &Path) -> String {
    p.to_str().expect("utf-8 path").to_owned()
}

// 1

fn codec_round_trip() -> Outcome {
    let start = Instant::now();
    let opts = CodecOptions::default();
    for seed in 0..1000u64 {
        let j = 2 + (seed as usize % 69);
        let sk = random_skeleton(seed, j);
        let order = sk.hierarchical_order().map_err(|e| e.to_string())?;
        let t = tokenize_joint_based(&sk, &order, &opts).map_err(|e| e.to_string())?;
        let (d, diags) = detokenize_joint_based(&t).map_err(|e| e.to_string())?;
        ensure!(diags.is_empty(), "seed {seed}: diagnostics {diags:?}");
        ensure!(
            d.len() == j,
            "seed {seed}: {} joints decoded, expected {j}",
            d.len()
        );
        let mut emitted = vec![0; j];
        for (e, &k) in order.iter().enumerate() {
            emitted[k] = e;
        }
        for (e, &k) in order.iter().enumerate() {
            ensure!(
                d.parents()[e] == sk.parents()[k].map(|p| emitted[p]),
                "seed {seed}: parent of joint {k}"
            );
            for a in 0..3 {
                let err = (d.joints()[e][a] - sk.joints()[k][a]).abs();
                ensure!(
                    err <= 1.0 / 256.0,
                    "seed {seed}: joint {k} axis {a} off by {err}"
                );
            }
        }
    }
    let lib = within(start, Duration::from_secs(10), "1000 round trips")?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bound = 100.0 * 3f64.sqrt() / 256.0;
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let rig = dir.path().join(format!("rig{seed}.json"));
        let (tok, back) = (dir.path().join("t.ptkn"), dir.path().join("back.json"));
        let sk = random_skeleton(5000 + seed, 2 + 7 * seed as usize);
        std::fs::write(&rig, rig_to_json(&sk, None).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for args in [
            vec!["tokenize".to_owned(), s(&rig), "-o".into(), s(&tok)],
            vec!["detokenize".to_owned(), s(&tok), "-o".into(), s(&back)],
        ] {
            let o = rigkit_cli(&args.iter().map(String::as_str).collect::<Vec<_>>());
            ensure!(
                o.status.success(),
                "{}: {}",
                args[0],
                String::from_utf8_lossy(&o.stderr)
            );
        }
        let o = rigkit_cli(&["metrics", &s(&back), &s(&rig), "--normalize", "none"]);
        ensure!(
            o.status.success(),
            "metrics: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())?;
        let cd = v["cd_j2j"].as_f64().ok_or("missing cd_j2j")?;
        ensure!(
            cd <= bound,
            "CLI CD-J2J {cd} exceeds {bound} (reporting units)"
        );
        worst = worst.max(cd);
    }
    Ok(format!(
        "1000 skeletons in {lib:.2} s; CLI CD-J2J max {:.2e} <= {:.2e}",
        worst / 100.0,
        bound / 100.0
    ))
}

// 2

fn payload_length_law() -> Outcome {
    let opts = CodecOptions::default();
    for j in 2..=70usize {
        let sk = random_skeleton(j as u64, j);
        let order = sk.hierarchical_order().map_err(|e| e.to_string())?;
        let pj = tokenize_joint_based(&sk, &order, &opts)
            .map_err(|e| e.to_string())?
            .payload()
            .map_err(|e| e.to_string())?
            .len();
        let pb = tokenize_bone_based(&sk, &order, &opts)
            .map_err(|e| e.to_string())?
            .payload()
            .map_err(|e| e.to_string())?
            .len();
        ensure!(
            pj == 4 * j && pb == 6 * (j - 1),
            "j={j}: payloads {pj}, {pb}"
        );
        let ok = match j {
            2 => pj > pb,
            3 => pj == pb,
            _ => pj < pb,
        };
        ensure!(ok, "j={j}: joint {pj} vs bone {pb}");
    }
    Ok("j in 2..=70: 4j vs 6(j-1)".into())
}

// 3

fn ordering_hazard() -> Outcome {
    let sk = Skeleton::new(
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.1, 0.0, -0.3),
            Vec3::new(0.0, 0.0, 0.2),
        ],
        vec![None, Some(2), Some(0)],
    );
    let spatial = sk.spatial_order();
    ensure!(spatial[0] == 1, "child is not emitted first: {spatial:?}");
    let opts = CodecOptions {
        allow_forward_parents: true,
        ..Default::default()
    };
    let t = tokenize_joint_based(&sk, &spatial, &opts).map_err(|e| e.to_string())?;
    let (_, diags) = detokenize_joint_based(&t).map_err(|e| e.to_string())?;
    ensure!(
        diags
            .iter()
            .any(|d| matches!(d, Diagnostic::Disconnected { .. })),
        "spatial stream not flagged: {diags:?}"
    );
    let t = tokenize_joint_based(
        &sk,
        &sk.hierarchical_order().map_err(|e| e.to_string())?,
        &CodecOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let (d, clean) = detokenize_joint_based(&t).map_err(|e| e.to_string())?;
    ensure!(
        clean.is_empty() && d.validate().is_valid(),
        "hierarchical stream: {clean:?}"
    );
    Ok(format!(
        "spatial: {}",
        diags
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    ))
}

// 4

fn anneal_schedule() -> Outcome {
    for e in [100.0, 64.0, 10.0, 7.0] {
        let cases = [
            (0.0, 1.0),
            (e / 4.0, 1.0),
            (e / 2.0, 1.0),
            (9.0 * e / 16.0, 0.75),
            (5.0 * e / 8.0, 0.5),
            (3.0 * e / 4.0, 0.0),
            (e, 0.0),
        ];
        for (epoch, want) in cases {
            let got = permutation_probability(epoch, e).map_err(|e| e.to_string())?;
            ensure!(
                (got - want).abs() <= f64::EPSILON,
                "E={e}, epoch {epoch}: {got} != {want}"
            );
        }
    }
    Ok("7 epochs x 4 horizons".into())
}

// 5

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let rows = run_suite(2024, 20);
    let t = within(start, Duration::from_secs(60), "gradient suite")?;
    let required = [
        "taja_attention",
        "skinning_head",
        "next_token_cross_entropy",
        "tracking_loss",
        "smoothness_regularizer",
    ];
    for name in required {
        let r = rows
            .iter()
            .find(|r| r.name == name)
            .ok_or(format!("{name} missing"))?;
        ensure!(
            r.instances >= 20 && r.passed,
            "{name}: max rel error {:e}",
            r.max_rel_error
        );
    }
    let worst = rows.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    Ok(format!(
        "{} kernels x 20, worst rel error {worst:.1e}, {t:.1} s",
        rows.len()
    ))
}

// 6

fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-scale..scale))
}

fn taja_degeneracy() -> Outcome {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = rng.random_range(2..20);
        let dk = rng.random_range(1..9);
        let heads = rng.random_range(1..4);
        let d = random_limb_skeleton(seed, j)
            .graph_distance_matrix()
            .map_err(|e| e.to_string())?;
        let values = (0..(DEFAULT_MAX_DISTANCE_LEVEL + 1) * heads)
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        let table = DistanceEmbeddingTable::from_values(DEFAULT_MAX_DISTANCE_LEVEL, heads, values)
            .map_err(|e| e.to_string())?;
        let inp = AttentionInputs {
            q: (0..heads).map(|_| rand_mat(&mut rng, j, dk, 2.0)).collect(),
            k: (0..heads).map(|_| rand_mat(&mut rng, j, dk, 2.0)).collect(),
            v: (0..heads).map(|_| rand_mat(&mut rng, j, dk, 2.0)).collect(),
            bias: distance_embedding(&d, &table),
            lambda: 0.0,
        };
        let ours = taja_attention(&inp).map_err(|e| e.to_string())?;
        let reference = scaled_dot_product_attention(&inp.q, &inp.k, &inp.v);
        ensure!(
            ours.output == reference.output && ours.attention == reference.attention,
            "instance {seed} differs"
        );
        for h in 0..heads {
            let naive = common::attention_naive(&inp.q[h], &inp.k[h], &inp.v[h], None);
            ensure!(
                (&ours.output[h] - naive).abs().max() < 1e-12,
                "instance {seed} off the naive oracle"
            );
        }
    }
    Ok("100 instances bitwise".into())
}

// 7

fn simplex_rows() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut zero_rows = 0;
    for i in 0..100_000 {
        let n = rng.random_range(1..5);
        let j = rng.random_range(1..6);
        let d = rng.random_range(1..6);
        let mut fp = rand_mat(&mut rng, n, d, 5.0);
        let mut fb = rand_mat(&mut rng, j, d, 5.0);
        if i % 7 == 0 {
            fp.row_mut(0).fill(0.0);
            zero_rows += 1;
        }
        if i % 11 == 0 {
            fb.row_mut(0).fill(0.0);
            zero_rows += 1;
        }
        let alpha = rng.random_range(-50.0..50.0);
        let w = skinning_head(&fp, &fb, alpha).map_err(|e| e.to_string())?;
        for r in w.row_iter() {
            ensure!(
                r.iter().all(|x| x.is_finite() && *x >= 0.0),
                "evaluation {i}: bad entry"
            );
            ensure!(
                (r.sum() - 1.0).abs() < 1e-6,
                "evaluation {i}: row sum {}",
                r.sum()
            );
        }
    }
    Ok(format!("1e5 evaluations, {zero_rows} zero-norm rows"))
}

// 8

fn random_weights(rng: &mut ChaCha8Rng, v: usize, j: usize) -> SkinWeights {
    let rows: Vec<Vec<f64>> = (0..v)
        .map(|_| {
            let r: Vec<f64> = (0..j)
                .map(|_| {
                    if rng.random_bool(0.4) {
                        rng.random_range(0.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            let sum: f64 = r.iter().sum();
            if sum == 0.0 {
                let mut one = vec![0.0; j];
                one[rng.random_range(0..j)] = 1.0;
                one
            } else {
                r.iter().map(|x| x / sum).collect()
            }
        })
        .collect();
    SkinWeights::from_rows(&rows).expect("valid rows")
}

fn random_pose(rng: &mut ChaCha8Rng, j: usize) -> Pose {
    let mut q = || {
        let axis = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        quat_from_axis_angle(&axis, rng.random_range(-3.0..3.0))
    };
    let root_rotation = q();
    let joint_rotations = (0..j).map(|_| q()).collect();
    Pose {
        root_rotation,
        root_translation: Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ),
        joint_rotations,
    }
}

fn fk_lbs_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for case in 0..500u64 {
        let j = rng.random_range(1..25);
        let sk = random_limb_skeleton(case, j);
        let p = random_pose(&mut rng, j);
        let t = forward_kinematics(&sk, &p).map_err(|e| e.to_string())?;
        let mats = common::fk_path_product(&sk, &p);
        for k in 0..j {
            worst = worst.max((t.matrix(k) - mats[k]).abs().max());
        }
        let pts: Vec<Vec3> = (0..30)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        let w = random_weights(&mut rng, pts.len(), j);
        let ours = skin_points(&pts, &w, &t).map_err(|e| e.to_string())?;
        for (a, b) in ours.iter().zip(common::lbs_naive(&pts, &w, &mats)) {
            worst = worst.max((a - b).norm());
        }
        ensure!(worst < 1e-9, "case {case}: deviation {worst:e}");
    }
    for case in 0..100u64 {
        let j = 2 + case as usize % 20;
        let sk = random_limb_skeleton(case, j);
        let mesh = tube_rig_mesh(&sk, 0.02, 0.1, 3, 6);
        let w = random_weights(&mut rng, mesh.vertices.len(), j);
        let t = forward_kinematics(&sk, &Pose::identity(j)).map_err(|e| e.to_string())?;
        ensure!(
            t.positions == sk.joints(),
            "identity moved joints (case {case})"
        );
        let out = linear_blend_skinning(&mesh, &sk, &w, &t).map_err(|e| e.to_string())?;
        ensure!(
            out == mesh.vertices,
            "identity moved vertices (case {case})"
        );
    }
    Ok(format!(
        "500 cases, max deviation {worst:.1e}; identity exact on 100 rigs"
    ))
}

// 9

fn jitter(sk: &Skeleton, rng: &mut ChaCha8Rng, amount: f64) -> Skeleton {
    let joints = sk
        .joints()
        .iter()
        .map(|p| {
            p + Vec3::new(
                rng.random_range(-amount..amount),
                rng.random_range(-amount..amount),
                rng.random_range(-amount..amount),
            )
        })
        .collect();
    Skeleton::new(joints, sk.parents().to_vec())
}

fn perturbed(w: &SkinWeights, rng: &mut ChaCha8Rng) -> SkinWeights {
    let rows: Vec<Vec<f64>> = w
        .rows()
        .map(|r| {
            let noisy: Vec<f64> = r
                .iter()
                .map(|x| (x + rng.random_range(-0.2..0.2)).max(0.0))
                .collect();
            let sum: f64 = noisy.iter().sum();
            if sum == 0.0 {
                r.to_vec()
            } else {
                noisy.iter().map(|x| x / sum).collect()
            }
        })
        .collect();
    SkinWeights::from_rows(&rows).expect("valid rows")
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..100u64 {
        let a = random_skeleton(seed, rng.random_range(1..40));
        let b = random_skeleton(seed + 1000, rng.random_range(1..40));
        let (ours, brute) = (
            cd_j2j(&a, &b).map_err(|e| e.to_string())?,
            common::j2j_brute(&a, &b),
        );
        ensure!(ours == brute, "j2j case {seed}: {ours} != {brute}");
    }
    let mut j2b_worst = 0.0f64;
    for seed in 0..100u64 {
        let a = random_limb_skeleton(seed, rng.random_range(2..20)).normalized();
        let b = jitter(&a, &mut rng, 0.1);
        j2b_worst = j2b_worst.max(
            (cd_j2b(&a, &b).map_err(|e| e.to_string())? - common::j2b_dense(&a, &b, 2000)).abs(),
        );
        ensure!(j2b_worst < 1e-3, "j2b case {seed}: {j2b_worst}");
    }
    let mut b2b_worst = 0.0f64;
    for seed in 0..100u64 {
        let a = random_limb_skeleton(seed, rng.random_range(2..20)).normalized();
        let b = jitter(&a, &mut rng, 0.1);
        let (c, f) = (
            cd_b2b(&a, &b, 256).map_err(|e| e.to_string())?,
            cd_b2b(&a, &b, 512).map_err(|e| e.to_string())?,
        );
        b2b_worst = b2b_worst.max((c - f).abs());
        ensure!(b2b_worst < 1e-3, "b2b case {seed}: {c} vs {f}");
        ensure!(
            (c - common::b2b_dense(&a, &b, 256)).abs() < 1e-12,
            "b2b case {seed} off the reference sampler"
        );
    }
    for case in 0..100u64 {
        let j = rng.random_range(2..10);
        let sk = random_limb_skeleton(case, j);
        let mesh = tube_rig_mesh(&sk, 0.03, 0.1, 2, 5);
        let gt =
            heuristic_skin_weights(&mesh, &sk, 3, DEFAULT_FALLOFF).map_err(|e| e.to_string())?;
        let pred = perturbed(&gt, &mut rng);
        let thr = [1e-4, 0.05, 0.2][case as usize % 3];
        let (p, r) = skinning_precision_recall(&pred, &gt, thr).map_err(|e| e.to_string())?;
        let (rp, rr) = common::precision_recall_ref(&pred, &gt, thr);
        ensure!(
            (p - rp).abs() < 1e-12 && (r - rr).abs() < 1e-12,
            "precision/recall case {case}"
        );
        let l1 = skinning_l1(&pred, &gt).map_err(|e| e.to_string())?;
        ensure!(
            (l1 - common::l1_ref(&pred, &gt)).abs() < 1e-12,
            "l1 case {case}"
        );
        let poses: Vec<_> = (0..3)
            .map(|i| sample_augmented_pose(&sk, pose_seed(case, i)))
            .collect();
        let ours = deformation_error_with(&mesh, &sk, &pred, &gt, case, 3, &Default::default())
            .map_err(|e| e.to_string())?;
        let reference = common::deformation_error_ref(&mesh, &sk, &pred, &gt, &poses);
        ensure!(
            (ours - reference).abs() < 1e-9,
            "deformation error case {case}: {ours} vs {reference}"
        );
    }
    Ok(format!("j2j exact; j2b max gap {j2b_worst:.1e}; b2b doubling gap {b2b_worst:.1e} (100 pairs); skinning metrics on 100 cases"))
}

// 10

fn recovery_config() -> OptimizerConfig {
    OptimizerConfig {
        learning_rate: 0.02,
        final_lr_fraction: 0.01,
        iterations: 2000,
        patience: 2000,
        ..Default::default()
    }
}

fn creature() -> Rig {
    let (sk, m, w) = creature_rig();
    Rig::new(sk, m, w).expect("creature rig is valid")
}

fn animation_recovery() -> Outcome {
    let start = Instant::now();
    let rig = creature();
    ensure!(rig.skeleton.len() == 10, "{} joints", rig.skeleton.len());
    let gt = smooth_motion(&rig.skeleton, 30, 4, 100, 45.0);
    let obs = observable_joints(&rig);
    let root = rig.skeleton.root().ok_or("no root")?;
    let mut parts = Vec::new();
    for (noise, rot_limit, px_limit) in [(0.0, 2.0, 0.5), (1.0, 5.0, 2.0)] {
        let cfg = SynthConfig {
            noise_px: noise,
            seed: 7,
            vertex_count: 1000,
        };
        let tracks =
            synthesize_tracks(&rig, &gt, &creature_camera(), &cfg).map_err(|e| e.to_string())?;
        let res = optimize(&rig, &tracks, &recovery_config()).map_err(|e| e.to_string())?;
        let rot =
            mean_rotation_error_deg(&res.params, &gt, root, &obs).map_err(|e| e.to_string())?;
        let px = mean_reprojection_error(&res.params, &rig, &tracks).map_err(|e| e.to_string())?;
        ensure!(
            rot < rot_limit,
            "noise {noise} px: rotation error {rot:.3} deg"
        );
        ensure!(px < px_limit, "noise {noise} px: reprojection {px:.3} px");
        parts.push(format!("noise {noise}: {rot:.3} deg, {px:.3} px"));
    }
    let t = within(start, Duration::from_secs(300), "recovery")?;
    Ok(format!(
        "{} vertices; {}; {t:.1} s",
        rig.mesh.vertices.len(),
        parts.join("; ")
    ))
}

// 11

fn regularizer_sweep() -> Outcome {
    let rig = creature();
    let gt = smooth_motion(&rig.skeleton, 12, 3, 200, 30.0);
    let cfg = SynthConfig {
        noise_px: 3.0,
        seed: 11,
        vertex_count: 300,
    };
    let tracks =
        synthesize_tracks(&rig, &gt, &creature_camera(), &cfg).map_err(|e| e.to_string())?;
    let mut v = Vec::new();
    for lambda_reg in [1e-4, 1e-3, 1e-2] {
        let oc = OptimizerConfig {
            lambda_reg,
            ..recovery_config()
        };
        let res = optimize(&rig, &tracks, &oc).map_err(|e| e.to_string())?;
        v.push(smoothness_per_pair(&res.params, &oc.smoothness));
    }
    ensure!(v[1] <= v[0] && v[2] <= v[1], "variance not monotone: {v:?}");
    Ok(format!(
        "frame-to-frame variance {:.4} >= {:.4} >= {:.4}",
        v[0], v[1], v[2]
    ))
}

// 12

fn look(eye: Vec3, focal: f64) -> Camera {
    Camera::look_at(&eye, &Vec3::zeros(), &Vec3::y(), focal, 512, 512).expect("valid camera")
}

fn all(m: &Mesh) -> Vec<usize> {
    (0..m.vertices.len()).collect()
}

const EYES: [[f64; 3]; 4] = [
    [2.1, 1.3, 2.7],
    [-3.0, 0.4, 1.1],
    [0.3, -2.6, -1.9],
    [1.7, 2.9, -0.6],
];

fn visibility() -> Outcome {
    for mesh in [icosphere(3, 1.0), cube_mesh(1.2)] {
        for e in EYES {
            let cam = look(Vec3::from(e), 300.0);
            let ours = vertex_visibility(&mesh, &cam, &all(&mesh)).map_err(|e| e.to_string())?;
            ensure!(
                ours == common::convex_vertex_visibility(&mesh, &cam.center()),
                "convex vertex visibility from {e:?}"
            );
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (sphere, cube) = (icosphere(3, 1.0), cube_mesh(1.0));
    let mut joints = 0;
    for e in EYES {
        let cam = look(Vec3::from(e), 300.0);
        let eye = cam.center();
        let mut pts = Vec::new();
        while pts.len() < 200 {
            let p = Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let d = p - eye;
            let t = (-eye.dot(&d) / d.dot(&d)).clamp(0.0, 1.0);
            let shell = |r: f64| (0.9..1.1).contains(&r);
            if !shell(p.norm()) && !shell((eye + d * t).norm()) {
                pts.push(p);
            }
        }
        let sk = Skeleton::new(
            pts.clone(),
            (0..pts.len()).map(|k| k.checked_sub(1)).collect(),
        );
        let vis = joint_visibility(&sphere, &sk, &cam).map_err(|e| e.to_string())?;
        for (p, v) in pts.iter().zip(vis) {
            ensure!(
                v == (common::sphere_crossings(&eye, p, 1.0) == 1),
                "sphere joint {p:?}"
            );
        }
        let pts: Vec<Vec3> = (0..300)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                )
            })
            .collect();
        let sk = Skeleton::new(
            pts.clone(),
            (0..pts.len()).map(|k| k.checked_sub(1)).collect(),
        );
        let vis = joint_visibility(&cube, &sk, &cam).map_err(|e| e.to_string())?;
        for (p, v) in pts.iter().zip(vis) {
            ensure!(
                v == (common::box_crossings(&eye, p, 0.5) == 1),
                "cube joint {p:?}"
            );
        }
        joints += 500;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut agree, mut total) = (0usize, 0usize);
    for seed in 0..20 {
        let mesh = random_closed_mesh(seed, 3);
        let dir = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let cam = look(dir.normalize() * 2.5, 500.0);
        let ours = vertex_visibility(&mesh, &cam, &all(&mesh)).map_err(|e| e.to_string())?;
        let zb = common::zbuffer_vertex_visibility(&mesh, &cam, 1024, 1e-3);
        agree += ours.iter().zip(&zb).filter(|(a, b)| a == b).count();
        total += ours.len();
    }
    let rate = agree as f64 / total as f64;
    ensure!(rate >= 0.99, "z-buffer agreement {:.2}%", 100.0 * rate);
    Ok(format!(
        "analytic sphere/cube exact ({joints} joints); z-buffer agreement {:.2}% of {total}",
        100.0 * rate
    ))
}

// 13

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn new() -> Result<Fixture, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let root = dir.path().to_path_buf();
        let (sk, m, w) = creature_rig();
        let anim = smooth_motion(&sk, 5, 2, 3, 30.0);
        let files = [
            ("rig.json", rig_to_json(&sk, Some(&w))),
            ("bare.json", rig_to_json(&sk, None)),
            ("small.json", rig_to_json(&random_skeleton(9, 15), None)),
            ("anim.json", animation_to_json(&anim)),
            ("camera.json", camera_to_json(&creature_camera())),
        ];
        for (name, text) in files {
            std::fs::write(root.join(name), text.map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        }
        std::fs::write(root.join("mesh.obj"), write_obj(&m)).map_err(|e| e.to_string())?;
        Ok(Fixture { _dir: dir, root })
    }

    fn p(&self, name: &str) -> String {
        s(&self.root.join(name))
    }
}

/// Runs the command with `{out}` substituted by a fresh path each time and
/// returns stdout followed by every output file's bytes.
fn run_capture(fx: &Fixture, args: &[String], tag: &str) -> Result<Vec<u8>, String> {
    let out = fx.root.join(format!("out_{tag}"));
    let _ = std::fs::remove_dir_all(&out);
    std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
    let argv: Vec<String> = args.iter().map(|a| a.replace("{out}", &s(&out))).collect();
    let o = rigkit_cli(&argv.iter().map(String::as_str).collect::<Vec<_>>());
    ensure!(
        o.status.success(),
        "{}: {}",
        args[0],
        String::from_utf8_lossy(&o.stderr)
    );
    let mut bytes = o.stdout;
    let mut names: Vec<_> = std::fs::read_dir(&out)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .collect();
    names.sort();
    for f in names {
        bytes.extend(
            f.file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .as_bytes(),
        );
        bytes.extend(std::fs::read(&f).map_err(|e| e.to_string())?);
    }
    Ok(bytes)
}

fn cli_determinism() -> Outcome {
    let fx = Fixture::new()?;
    let prep = rigkit_cli(&[
        "synth-tracks",
        "--rig",
        &fx.p("rig.json"),
        "--mesh",
        &fx.p("mesh.obj"),
        "--animation",
        &fx.p("anim.json"),
        "--camera",
        &fx.p("camera.json"),
        "--noise",
        "1",
        "--seed",
        "3",
        "-o",
        &fx.p("tracks.json"),
    ]);
    ensure!(
        prep.status.success(),
        "synth-tracks: {}",
        String::from_utf8_lossy(&prep.stderr)
    );
    let prep = rigkit_cli(&[
        "tokenize",
        &fx.p("small.json"),
        "--shuffle-seed",
        "5",
        "-o",
        &fx.p("small.ptkn"),
    ]);
    ensure!(
        prep.status.success(),
        "tokenize: {}",
        String::from_utf8_lossy(&prep.stderr)
    );

    let cmds: Vec<Vec<String>> = [
        vec!["validate", &fx.p("rig.json"), "--mesh", &fx.p("mesh.obj")],
        vec![
            "tokenize",
            &fx.p("small.json"),
            "--shuffle-seed",
            "8",
            "--permute-prob",
            "0.5",
            "-o",
            "{out}/t.ptkn",
        ],
        vec![
            "tokenize",
            &fx.p("small.json"),
            "--scheme",
            "bone",
            "--text",
        ],
        vec!["detokenize", &fx.p("small.ptkn")],
        vec![
            "metrics",
            &fx.p("rig.json"),
            &fx.p("rig.json"),
            "--mesh",
            &fx.p("mesh.obj"),
            "--poses",
            "3",
            "--seed",
            "4",
        ],
        vec![
            "deform",
            "--rig",
            &fx.p("rig.json"),
            "--mesh",
            &fx.p("mesh.obj"),
            "--pose",
            &fx.p("anim.json"),
            "--frame",
            "3",
        ],
        vec![
            "skin-heuristic",
            "--mesh",
            &fx.p("mesh.obj"),
            "--rig",
            &fx.p("bare.json"),
        ],
        vec!["grad-check", "--instances", "2", "--seed", "6"],
        vec![
            "synth-tracks",
            "--rig",
            &fx.p("bare.json"),
            "--mesh",
            &fx.p("mesh.obj"),
            "--animation",
            &fx.p("anim.json"),
            "--camera",
            &fx.p("camera.json"),
            "--noise",
            "2",
            "--seed",
            "9",
        ],
        vec![
            "animate",
            "--rig",
            &fx.p("rig.json"),
            "--mesh",
            &fx.p("mesh.obj"),
            "--tracks",
            &fx.p("tracks.json"),
            "--iterations",
            "60",
            "--obj-dir",
            "{out}",
        ],
        vec!["anneal", "--epochs", "40"],
        vec!["sample", &fx.p("mesh.obj"), "--count", "64", "--seed", "2"],
        vec![
            "raycast",
            &fx.p("mesh.obj"),
            "--origin",
            "0.04,-0.02,-2",
            "--direction",
            "0,0.01,1",
        ],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(str::to_owned).collect())
    .collect();
    let mut covered = Vec::new();
    for (i, c) in cmds.iter().enumerate() {
        let a = run_capture(&fx, c, &format!("{i}a"))?;
        let b = run_capture(&fx, c, &format!("{i}b"))?;
        ensure!(!a.is_empty(), "{} produced no output", c[0]);
        ensure!(a == b, "{} output differs between runs", c[0]);
        if !covered.contains(&c[0]) {
            covered.push(c[0].clone());
        }
    }
    Ok(format!(
        "{} subcommands, {} invocations byte-identical",
        covered.len(),
        cmds.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("codec round trip", codec_round_trip),
        ("payload length law", payload_length_law),
        ("spatial ordering hazard", ordering_hazard),
        ("annealing schedule", anneal_schedule),
        ("kernel gradient suite", gradient_suite),
        ("TAJA degeneracy", taja_degeneracy),
        ("skinning simplex rows", simplex_rows),
        ("FK/LBS oracles", fk_lbs_oracles),
        ("metric oracles", metric_oracles),
        ("animation recovery", animation_recovery),
        ("regularizer monotonicity", regularizer_sweep),
        ("visibility", visibility),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
