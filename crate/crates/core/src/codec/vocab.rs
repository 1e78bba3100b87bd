// SPDX-License-Identifier: Apache-2.0

//! Fixed vocabulary layout shared by every token file.

/// Quantisation bins per axis; coordinate tokens are `0..COORD_BINS`.
pub const COORD_BINS: u16 = 128;
pub const BOS: u16 = 128;
pub const EOS: u16 = 129;
pub const PAD: u16 = 130;
pub const SHAPE_PLACEHOLDER: u16 = 131;
/// Parent token for offset parent index `p` (root = 0, else position + 1).
pub const PARENT_BASE: u16 = 132;
pub const PARENT_SLOTS: u16 = crate::MAX_JOINTS as u16 + 1;
pub const VOCAB_SIZE: usize = (PARENT_BASE + PARENT_SLOTS) as usize;

/// Default number of shape placeholder tokens ahead of the skeleton tokens.
pub const DEFAULT_SHAPE_TOKENS: usize = 257;

pub fn is_coordinate(t: u16) -> bool {
    t < COORD_BINS
}

pub fn is_parent(t: u16) -> bool {
    (PARENT_BASE..PARENT_BASE + PARENT_SLOTS).contains(&t)
}

pub fn parent_token(offset_index: usize) -> u16 {
    debug_assert!(offset_index < PARENT_SLOTS as usize);
    PARENT_BASE + offset_index as u16
}
