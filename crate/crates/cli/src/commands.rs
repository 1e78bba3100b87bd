// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rigkit::animate::{optimize, synthesize_tracks, OptimizerConfig, Rig, SynthConfig};
use rigkit::codec::{
    detokenize_bone_based, detokenize_joint_based, permutation_probability, randomize_groups,
    read_token_file, token_text_dump, tokenize_bone_based, tokenize_joint_based, unshuffle_groups,
    write_token_file, CodecOptions, ParentRef, Scheme,
};
use rigkit::deform::{
    deform_mesh, forward_kinematics, heuristic_skin_weights, DEFAULT_FALLOFF, DEFAULT_K_NEAREST,
};
use rigkit::geometry::{parse_obj, sample_surface, write_obj, RayCaster};
use rigkit::io::{
    animation_to_json, parse_animation, parse_camera, parse_poses, parse_rig, parse_tracks,
    rig_to_json, to_canonical_string, tracks_to_json, RigFile,
};
use rigkit::math::Vec3;
use rigkit::metrics::{evaluate, MetricConfig, Normalization};
use rigkit::{gradcheck, Mesh, RigError, SkinWeights};
use serde_json::json;

use crate::{
    AnimateArgs, Cli, CliError, Command, MetricsArgs, NormalizeArg, OrderArg, SchemeArg,
    TokenizeArgs,
};

type Result<T> = std::result::Result<T, CliError>;

fn read_text(p: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(p).map_err(RigError::Io)?)
}

fn read_rig(p: &Path) -> Result<RigFile> {
    Ok(parse_rig(&read_text(p)?)?)
}

fn read_mesh(p: &Path) -> Result<Mesh> {
    let bytes = std::fs::read(p).map_err(RigError::Io)?;
    Ok(parse_obj(&bytes)?)
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(RigError::Io)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes).map_err(RigError::Io)?;
            so.flush().map_err(RigError::Io)?;
        }
    }
    Ok(())
}

/// The rig's own weights, or heuristic ones when it carries none.
fn weights_for(rig: &RigFile, mesh: &Mesh, verbose: bool) -> Result<SkinWeights> {
    match &rig.weights {
        Some(w) => Ok(w.clone()),
        None => {
            if verbose {
                eprintln!("rig has no weights; using heuristic skinning");
            }
            Ok(heuristic_skin_weights(
                mesh,
                &rig.skeleton,
                DEFAULT_K_NEAREST,
                DEFAULT_FALLOFF,
            )?)
        }
    }
}

fn vec3(v: &[f64]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

pub fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Validate { rig, mesh } => validate(rig, mesh.as_deref()),
        Command::Tokenize(a) => tokenize(a),
        Command::Detokenize { input, output } => detokenize(input, output, cli.verbose),
        Command::Metrics(a) => metrics(a, seed),
        Command::Deform {
            rig,
            mesh,
            pose,
            frame,
            output,
        } => {
            let r = read_rig(rig)?;
            let m = read_mesh(mesh)?;
            let poses = parse_poses(&read_text(pose)?)?;
            let p = poses.get(*frame).ok_or_else(|| {
                CliError::Validation(format!(
                    "frame {frame} out of range for {} frames",
                    poses.len()
                ))
            })?;
            let w = weights_for(&r, &m, cli.verbose)?;
            let t = forward_kinematics(&r.skeleton, p)?;
            emit(
                output,
                write_obj(&deform_mesh(&m, &r.skeleton, &w, &t)?).as_bytes(),
            )
        }
        Command::SkinHeuristic {
            mesh,
            rig,
            k,
            falloff,
            output,
        } => {
            let r = read_rig(rig)?;
            let m = read_mesh(mesh)?;
            let w = heuristic_skin_weights(&m, &r.skeleton, *k, *falloff)?;
            emit(output, rig_to_json(&r.skeleton, Some(&w))?.as_bytes())
        }
        Command::GradCheck { instances } => grad_check(seed, *instances),
        Command::SynthTracks {
            rig,
            mesh,
            animation,
            camera,
            noise,
            vertices,
            output,
        } => {
            let r = read_rig(rig)?;
            let m = read_mesh(mesh)?;
            let anim = parse_animation(&read_text(animation)?)?;
            let cam = parse_camera(&read_text(camera)?)?;
            let w = weights_for(&r, &m, cli.verbose)?;
            let rig = Rig::new(r.skeleton, m, w)?;
            let cfg = SynthConfig {
                noise_px: *noise,
                seed,
                vertex_count: *vertices,
            };
            let tracks = synthesize_tracks(&rig, &anim, &cam, &cfg)?;
            emit(output, tracks_to_json(&tracks)?.as_bytes())
        }
        Command::Animate(a) => animate(a, cli.verbose),
        Command::Anneal { epochs } => {
            let mut s = String::new();
            for e in 0..=*epochs {
                let r = permutation_probability(e as f64, *epochs as f64)?;
                let _ = writeln!(s, "{e} {r:.6}");
            }
            emit(&None, s.as_bytes())
        }
        Command::Sample { mesh, count } => {
            let m = read_mesh(mesh)?;
            let smp = sample_surface(&m, *count, seed)?;
            let mut s = String::from("# index x y z nx ny nz triangle\n");
            for (i, ((p, n), t)) in smp
                .points
                .iter()
                .zip(&smp.normals)
                .zip(&smp.triangles)
                .enumerate()
            {
                let _ = writeln!(
                    s,
                    "{i} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9} {t}",
                    p.x, p.y, p.z, n.x, n.y, n.z
                );
            }
            emit(&None, s.as_bytes())
        }
        Command::Raycast {
            mesh,
            origin,
            direction,
        } => {
            if origin.len() != 3 || direction.len() != 3 {
                return Err(CliError::Usage(
                    "--origin and --direction take x,y,z".into(),
                ));
            }
            let m = read_mesh(mesh)?;
            let hits = RayCaster::new(&m).intersections(&vec3(origin), &vec3(direction))?;
            let mut s = String::from("# t triangle\n");
            for h in hits {
                let _ = writeln!(s, "{:.9} {}", h.t, h.triangle);
            }
            emit(&None, s.as_bytes())
        }
    }
}

fn validate(rig: &Path, mesh: Option<&Path>) -> Result<()> {
    let r = read_rig(rig)?;
    let s = &r.skeleton;
    let report = s.validate();
    let mut ok = report.is_valid();
    let mut out = format!(
        "joints {}\nbones {}\nskeleton {report}\n",
        s.len(),
        s.bone_count()
    );
    let m = mesh.map(read_mesh).transpose()?;
    if let Some(m) = &m {
        let mr = m.validate();
        ok &= mr.is_valid();
        let _ = writeln!(
            out,
            "mesh vertices {} triangles {} degenerate {} out_of_range {} boundary_edges {}",
            m.vertices.len(),
            m.triangles.len(),
            mr.degenerate.len(),
            mr.out_of_range.len(),
            mr.boundary_edges
        );
    }
    if let Some(w) = &r.weights {
        let bad = w.invalid_rows();
        let _ = write!(out, "weights {}x{}", w.vertex_count(), w.joint_count());
        if bad.is_empty() {
            out.push_str(" ok");
        } else {
            ok = false;
            let _ = write!(out, " invalid_rows {}", bad.len());
        }
        if let Some(m) = &m {
            if w.check_shape(m.vertices.len(), s.len()).is_err() {
                ok = false;
                out.push_str(" shape_mismatch");
            }
        }
        out.push('\n');
    }
    emit(&None, out.as_bytes())?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Validation("rig failed validation".into()))
    }
}

fn tokenize(a: &TokenizeArgs) -> Result<()> {
    let r = read_rig(&a.rig)?;
    r.skeleton.ensure_valid()?;
    let s = if a.normalize {
        r.skeleton.normalized()
    } else {
        r.skeleton
    };
    if s.joints().iter().any(|p| p.iter().any(|c| c.abs() > 0.5)) {
        return Err(CliError::Validation(
            "coordinates lie outside [-0.5, 0.5]; pass --normalize".into(),
        ));
    }
    let opts = CodecOptions {
        shape_tokens: a.shape_tokens,
        allow_forward_parents: a.order == OrderArg::Spatial,
    };
    let order = match a.order {
        OrderArg::Hier => s.hierarchical_order()?,
        OrderArg::Spatial => s.spatial_order(),
    };
    let mut t = match a.scheme {
        SchemeArg::Joint => tokenize_joint_based(&s, &order, &opts)?,
        SchemeArg::Bone => tokenize_bone_based(&s, &order, &opts)?,
    };
    if let Some(shuffle) = a.shuffle_seed {
        if a.scheme == SchemeArg::Bone {
            return Err(CliError::Usage(
                "--shuffle-seed needs --scheme joint".into(),
            ));
        }
        t = randomize_groups(&t, shuffle, a.permute_prob, ParentRef::Emission)?;
    }
    if a.text {
        return emit(&a.output, token_text_dump(&t).as_bytes());
    }
    let mut buf = Vec::new();
    write_token_file(&t, &mut buf)?;
    emit(&a.output, &buf)
}

fn detokenize(input: &Path, output: &Option<PathBuf>, verbose: bool) -> Result<()> {
    let bytes = std::fs::read(input).map_err(RigError::Io)?;
    let t = read_token_file(&bytes)?;
    let (s, diags) = match t.scheme {
        Scheme::JointBased => {
            let t = if t.is_sequential() {
                t
            } else {
                unshuffle_groups(&t, ParentRef::Emission)?
            };
            detokenize_joint_based(&t)?
        }
        Scheme::BoneBased => detokenize_bone_based(&t)?,
    };
    for d in &diags {
        eprintln!("diagnostic: {d}");
    }
    let report = s.validate();
    if !report.is_valid() {
        let mut msg = format!("decoded skeleton is invalid: {report}");
        for d in &diags {
            let _ = write!(msg, "; {d}");
        }
        return Err(CliError::Validation(msg));
    }
    if verbose {
        eprintln!("decoded {} joints", s.len());
    }
    emit(output, rig_to_json(&s, None)?.as_bytes())
}

fn metrics(a: &MetricsArgs, seed: u64) -> Result<()> {
    let pred = read_rig(&a.pred)?;
    let gt = read_rig(&a.gt)?;
    let mesh = a.mesh.as_deref().map(read_mesh).transpose()?;
    let mut cfg = MetricConfig::for_mesh(mesh.as_ref());
    cfg.normalization = match a.normalize {
        NormalizeArg::Auto => cfg.normalization,
        NormalizeArg::None => Normalization::None,
        NormalizeArg::Own => Normalization::OwnBox,
        NormalizeArg::Union => Normalization::UnionBox,
    };
    if let Some(b) = a.bone_samples {
        cfg.bone_samples = b;
    }
    if let Some(t) = a.threshold {
        cfg.threshold = t;
    }
    if let Some(p) = a.poses {
        cfg.deformation_poses = p;
    }
    pred.skeleton.ensure_valid()?;
    gt.skeleton.ensure_valid()?;
    let weights = match (&pred.weights, &gt.weights) {
        (Some(p), Some(g)) => Some((p, g)),
        _ => None,
    };
    let r = evaluate(
        &pred.skeleton,
        &gt.skeleton,
        weights,
        mesh.as_ref(),
        &cfg,
        seed,
    )?
    .in_reporting_units();
    let v = json!({
        "cd_j2j": r.cd_j2j,
        "cd_j2b": r.cd_j2b,
        "cd_b2b": r.cd_b2b,
        "precision": r.precision,
        "recall": r.recall,
        "l1": r.l1,
        "deformation_error": r.deformation_error,
    });
    emit(&a.output, to_canonical_string(&v).as_bytes())
}

fn grad_check(seed: u64, instances: usize) -> Result<()> {
    if instances == 0 {
        return Err(CliError::Usage("--instances must be at least 1".into()));
    }
    let rows = gradcheck::run_suite(seed, instances);
    let mut s = format!(
        "{:<26} {:>9} {:>13} status\n",
        "kernel", "instances", "max_rel_err"
    );
    for r in &rows {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(
            s,
            "{:<26} {:>9} {:>13.3e} {status}",
            r.name, r.instances, r.max_rel_error
        );
    }
    emit(&None, s.as_bytes())?;
    if rows.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(CliError::Validation("gradient check failed".into()))
    }
}

fn animate(a: &AnimateArgs, verbose: bool) -> Result<()> {
    let r = read_rig(&a.rig)?;
    let m = read_mesh(&a.mesh)?;
    let tracks = parse_tracks(&read_text(&a.tracks)?)?;
    let w = weights_for(&r, &m, verbose)?;
    let rig = Rig::new(r.skeleton, m, w)?;
    let mut cfg = OptimizerConfig::default();
    if let Some(v) = a.lr {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.final_lr_fraction {
        cfg.final_lr_fraction = v;
    }
    if let Some(v) = a.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = a.patience {
        cfg.patience = v;
    }
    if let Some(v) = a.lambda_reg {
        cfg.lambda_reg = v;
    }
    if let Some(v) = a.translation_weight {
        cfg.smoothness.translation = v;
    }
    let res = optimize(&rig, &tracks, &cfg)?;
    if verbose {
        eprintln!(
            "iterations {} objective {:.6e} converged {}",
            res.iterations,
            res.best_trace.last().copied().unwrap_or(0.0),
            res.converged
        );
    }
    if let Some(dir) = &a.obj_dir {
        std::fs::create_dir_all(dir).map_err(RigError::Io)?;
        for (i, p) in res.params.frames.iter().enumerate() {
            let t = forward_kinematics(&rig.skeleton, p)?;
            let posed = deform_mesh(&rig.mesh, &rig.skeleton, &rig.weights, &t)?;
            std::fs::write(dir.join(format!("frame_{i:04}.obj")), write_obj(&posed))
                .map_err(RigError::Io)?;
        }
    }
    emit(&a.output, animation_to_json(&res.params)?.as_bytes())
}
