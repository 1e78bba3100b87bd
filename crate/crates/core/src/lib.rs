// SPDX-License-Identifier: Apache-2.0

//! Rigging and animation toolkit.
//!
//! The crate is organised bottom-up:
//!
//! - [`skeleton`], [`mesh`], [`weights`], [`pose`]: the rig data model.
//! - [`codec`]: quantised joint-based and bone-based skeleton token streams,
//!   randomized group ordering with target-aware indicators, and the binary
//!   token file format.
//! - [`kernels`]: topology-aware joint attention, the cosine/softmax skinning
//!   head and next-token cross-entropy, each with an exact backward pass.
//! - [`deform`]: forward kinematics, linear blend skinning, pose augmentation
//!   and a geometric skinning baseline.
//! - [`metrics`]: skeleton chamfer metrics and skinning-weight metrics.
//! - [`geometry`]: OBJ I/O, surface sampling, ray queries, nearest-neighbour
//!   weight transfer and a pinhole camera.
//! - [`animate`]: visibility masks, tracking and smoothness losses with
//!   analytic gradients, and the adaptive-moment animation optimizer.
//!
//! Data-parallel inner loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.

pub mod animate;
pub mod codec;
pub mod deform;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod gradcheck;
pub mod io;
pub mod kernels;
pub mod math;
pub mod mesh;
pub mod metrics;
pub mod par;
pub mod pose;
pub mod skeleton;
pub mod weights;

pub use error::{Result, RigError};
pub use mesh::Mesh;
pub use pose::Pose;
pub use skeleton::Skeleton;
pub use weights::SkinWeights;

/// Maximum number of joints a skeleton may carry.
pub const MAX_JOINTS: usize = 70;
