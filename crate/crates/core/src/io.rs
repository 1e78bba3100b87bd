// SPDX-License-Identifier: Apache-2.0

//! JSON formats for rigs, animations, cameras and track sets.
//!
//! Output goes through [`serde_json::Value`], whose maps are ordered, so keys
//! come out sorted and floats use shortest round-trip formatting.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::animate::{AnimParams, TrackSet};
use crate::error::{Result, RigError};
use crate::geometry::Camera;
use crate::math::{quat_from_wxyz, quat_to_wxyz, Mat3, Vec3};
use crate::pose::Pose;
use crate::skeleton::Skeleton;
use crate::weights::SkinWeights;

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| RigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn semantic(message: impl Into<String>) -> RigError {
    RigError::Parse {
        line: 0,
        column: 0,
        message: message.into(),
    }
}

/// Pretty-printed, newline-terminated canonical JSON.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn finite(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(RigError::arg(format!("non-finite value in {what}")))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RigJson {
    joints: Vec<[f64; 3]>,
    parents: Vec<i64>,
    #[serde(default)]
    names: Option<Vec<String>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

/// A skeleton plus optional skinning weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RigFile {
    pub skeleton: Skeleton,
    pub weights: Option<SkinWeights>,
}

/// Parses a rig. Structural checks (one root, no cycles, ...) are left to
/// [`Skeleton::validate`].
pub fn parse_rig(text: &str) -> Result<RigFile> {
    let r: RigJson = parse(text)?;
    if r.parents.len() != r.joints.len() {
        return Err(semantic(format!(
            "'parents' has {} entries for {} joints",
            r.parents.len(),
            r.joints.len()
        )));
    }
    let parents = r
        .parents
        .iter()
        .enumerate()
        .map(|(k, &p)| match p {
            -1 => Ok(None),
            p if p >= 0 => Ok(Some(p as usize)),
            p => Err(semantic(format!("parents[{k}] = {p}; the root is -1"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut skeleton = Skeleton::new(r.joints.iter().map(|j| Vec3::from(*j)).collect(), parents);
    if let Some(names) = r.names {
        if names.len() != r.joints.len() {
            return Err(semantic(format!(
                "'names' has {} entries for {} joints",
                names.len(),
                r.joints.len()
            )));
        }
        skeleton = skeleton.with_names(names);
    }
    let weights = match r.weights {
        None => None,
        Some(w) => {
            let j = r.joints.len();
            if j == 0 || w.len() % j != 0 {
                return Err(semantic(format!(
                    "'weights' length {} is not a multiple of {j} joints",
                    w.len()
                )));
            }
            Some(SkinWeights::from_flat(w.len() / j, j, w)?)
        }
    };
    Ok(RigFile { skeleton, weights })
}

pub fn rig_to_json(s: &Skeleton, weights: Option<&SkinWeights>) -> Result<String> {
    let joints: Vec<[f64; 3]> = s.joints().iter().map(|p| [p.x, p.y, p.z]).collect();
    finite(&joints.concat(), "joints")?;
    let parents: Vec<i64> = s
        .parents()
        .iter()
        .map(|p| p.map_or(-1, |p| p as i64))
        .collect();
    let mut v = json!({ "joints": joints, "parents": parents });
    if let Some(names) = s.names() {
        v["names"] = json!(names);
    }
    if let Some(w) = weights {
        finite(w.as_slice(), "weights")?;
        v["weights"] = json!(w.as_slice());
    }
    Ok(to_canonical_string(&v))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameJson {
    root_quat: [f64; 4],
    root_trans: [f64; 3],
    joint_quats: Vec<[f64; 4]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnimJson {
    frames: Vec<FrameJson>,
}

/// Parses the frames of a pose/animation file without requiring a rest frame.
pub fn parse_poses(text: &str) -> Result<Vec<Pose>> {
    let a: AnimJson = parse(text)?;
    if a.frames.is_empty() {
        return Err(semantic("'frames' is empty"));
    }
    let j = a.frames[0].joint_quats.len();
    a.frames
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            if f.joint_quats.len() != j {
                return Err(semantic(format!(
                    "frame {i} has {} joint quaternions, expected {j}",
                    f.joint_quats.len()
                )));
            }
            Ok(Pose {
                root_rotation: quat_from_wxyz(f.root_quat),
                root_translation: Vec3::from(f.root_trans),
                joint_rotations: f.joint_quats.into_iter().map(quat_from_wxyz).collect(),
            })
        })
        .collect()
}

pub fn parse_animation(text: &str) -> Result<AnimParams> {
    Ok(AnimParams {
        frames: parse_poses(text)?,
    })
}

pub fn poses_to_json(frames: &[Pose]) -> Result<String> {
    let a = AnimJson {
        frames: frames
            .iter()
            .map(|f| FrameJson {
                root_quat: quat_to_wxyz(&f.root_rotation),
                root_trans: [
                    f.root_translation.x,
                    f.root_translation.y,
                    f.root_translation.z,
                ],
                joint_quats: f.joint_rotations.iter().map(quat_to_wxyz).collect(),
            })
            .collect(),
    };
    for f in &a.frames {
        finite(&f.root_quat, "root_quat")?;
        finite(&f.root_trans, "root_trans")?;
        finite(&f.joint_quats.concat(), "joint_quats")?;
    }
    Ok(to_canonical_string(&serde_json::to_value(&a)?))
}

pub fn animation_to_json(a: &AnimParams) -> Result<String> {
    poses_to_json(&a.frames)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraJson {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    /// Rows of the world-to-camera rotation.
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LookAtJson {
    eye: [f64; 3],
    target: [f64; 3],
    #[serde(default = "default_up")]
    up: [f64; 3],
    focal: f64,
    image_size: [u32; 2],
}

fn default_up() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CameraInput {
    Explicit {
        #[serde(flatten)]
        cam: CameraJson,
        image_size: [u32; 2],
    },
    LookAt(LookAtJson),
}

fn camera_from(c: &CameraJson, size: [u32; 2]) -> Result<Camera> {
    let r = c.rotation;
    let cam = Camera {
        fx: c.fx,
        fy: c.fy,
        cx: c.cx,
        cy: c.cy,
        width: size[0],
        height: size[1],
        rotation: Mat3::new(
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        ),
        translation: Vec3::from(c.translation),
    };
    cam.validate()?;
    Ok(cam)
}

fn camera_json(c: &Camera) -> CameraJson {
    let r = c.rotation;
    CameraJson {
        fx: c.fx,
        fy: c.fy,
        cx: c.cx,
        cy: c.cy,
        rotation: [0, 1, 2].map(|i| [r[(i, 0)], r[(i, 1)], r[(i, 2)]]),
        translation: [c.translation.x, c.translation.y, c.translation.z],
    }
}

/// Either explicit intrinsics/extrinsics with `image_size`, or a look-at
/// description `{eye, target, up?, focal, image_size}`.
pub fn parse_camera(text: &str) -> Result<Camera> {
    match parse::<CameraInput>(text)? {
        CameraInput::Explicit { cam, image_size } => camera_from(&cam, image_size),
        CameraInput::LookAt(l) => Camera::look_at(
            &Vec3::from(l.eye),
            &Vec3::from(l.target),
            &Vec3::from(l.up),
            l.focal,
            l.image_size[0],
            l.image_size[1],
        ),
    }
}

pub fn camera_to_json(c: &Camera) -> Result<String> {
    let mut v = serde_json::to_value(camera_json(c))?;
    v["image_size"] = json!([c.width, c.height]);
    Ok(to_canonical_string(&v))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackJson {
    camera: CameraJson,
    image_size: [u32; 2],
    joint_tracks: Vec<Vec<[f64; 2]>>,
    vertex_tracks: Vec<Vec<[f64; 2]>>,
    vertex_subset: Vec<usize>,
    joint_visibility: Vec<bool>,
    vertex_visibility: Vec<bool>,
}

pub fn parse_tracks(text: &str) -> Result<TrackSet> {
    let t: TrackJson = parse(text)?;
    Ok(TrackSet {
        camera: camera_from(&t.camera, t.image_size)?,
        joint_tracks: t.joint_tracks,
        vertex_tracks: t.vertex_tracks,
        vertex_subset: t.vertex_subset,
        joint_visibility: t.joint_visibility,
        vertex_visibility: t.vertex_visibility,
    })
}

pub fn tracks_to_json(t: &TrackSet) -> Result<String> {
    finite(&t.joint_tracks.concat().concat(), "joint tracks")?;
    finite(&t.vertex_tracks.concat().concat(), "vertex tracks")?;
    let j = TrackJson {
        camera: camera_json(&t.camera),
        image_size: [t.camera.width, t.camera.height],
        joint_tracks: t.joint_tracks.clone(),
        vertex_tracks: t.vertex_tracks.clone(),
        vertex_subset: t.vertex_subset.clone(),
        joint_visibility: t.joint_visibility.clone(),
        vertex_visibility: t.vertex_visibility.clone(),
    };
    Ok(to_canonical_string(&serde_json::to_value(&j)?))
}
