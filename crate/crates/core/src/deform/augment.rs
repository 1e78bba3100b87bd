// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::quat_from_euler_xyz;
use crate::pose::Pose;
use crate::skeleton::Skeleton;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentConfig {
    /// Chance that a joint is rotated at all.
    pub probability: f64,
    /// Bound on each Euler component, degrees.
    pub max_angle_deg: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            probability: 0.3,
            max_angle_deg: 60.0,
        }
    }
}

pub fn sample_augmented_pose(s: &Skeleton, seed: u64) -> Pose {
    sample_augmented_pose_with(s, seed, &AugmentConfig::default())
}

/// Local-frame rotations; root translation and root rotation stay zero.
pub fn sample_augmented_pose_with(s: &Skeleton, seed: u64, cfg: &AugmentConfig) -> Pose {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lim = cfg.max_angle_deg.to_radians();
    let mut pose = Pose::identity(s.len());
    for q in pose.joint_rotations.iter_mut() {
        if rng.random::<f64>() < cfg.probability {
            let x = rng.random_range(-lim..=lim);
            let y = rng.random_range(-lim..=lim);
            let z = rng.random_range(-lim..=lim);
            *q = quat_from_euler_xyz(x, y, z);
        }
    }
    pose
}
