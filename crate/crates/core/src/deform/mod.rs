// SPDX-License-Identifier: Apache-2.0

//! Forward kinematics, linear blend skinning, pose augmentation and a
//! distance-based skinning baseline.
//!
//! Local joint rotations act about the joint's rest position. For joint `k`
//! with parent `p`:
//!
//! ```text
//! A_k = A_p · R_k            p_k = A_p (c_k − c_p) + p_p
//! A_0 = R_root · R_0         p_0 = c_0 + t_root
//! T_k(x) = A_k (x − c_k) + p_k
//! ```
//!
//! so `p_k` is the posed position of joint `k` and the identity pose maps
//! every rest point to itself.

mod augment;
mod fk;
mod heuristic;
mod lbs;

pub use augment::{sample_augmented_pose, sample_augmented_pose_with, AugmentConfig};
pub use fk::{forward_kinematics, JointTransforms};
pub use heuristic::{heuristic_skin_weights, DEFAULT_FALLOFF, DEFAULT_K_NEAREST};
pub use lbs::{deform_mesh, linear_blend_skinning, skin_points};

pub(crate) use fk::fk_ordered;
