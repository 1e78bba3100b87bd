// SPDX-License-Identifier: Apache-2.0

//! Track-guided animation: visibility masks, tracking and smoothness losses
//! with analytic gradients, and an adaptive-moment optimizer.
//!
//! Frame 0 is the rest pose. Only frames `1..n` carry free parameters, laid
//! out per frame as `[root quat (w,x,y,z), root translation, joint quats]`.

mod eval;
mod loss;
mod optimize;
mod params;
mod synth;
mod tracks;
mod visibility;

pub use eval::{
    mean_reprojection_error, mean_rotation_error_deg, observable_joints, smoothness_per_pair,
};
pub use loss::{smoothness_regularizer, tracking_loss, SmoothnessWeights, TrackingLoss};
pub use optimize::{
    objective, optimize, optimize_from, Objective, OptimizeResult, OptimizerConfig,
};
pub use params::AnimParams;
pub use synth::{synthesize_tracks, SynthConfig};
pub use tracks::{Rig, TrackSet};
pub use visibility::{joint_visibility, vertex_visibility, JOINT_BAND, VERTEX_TOLERANCE};
