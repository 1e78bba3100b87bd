// SPDX-License-Identifier: Apache-2.0

//! Skeleton ⇄ token stream conversion.
//!
//! Stream layout: `[SHAPE × n, BOS, payload, EOS]`, where the shape
//! placeholders stand in for an external shape encoder's tokens. A parallel
//! indicator stream carries, per token, the canonical index of the joint group
//! that is generated next (`None` on the last group and on EOS).
//!
//! Joint-based payloads hold 4 tokens per joint (`x, y, z, parent`);
//! bone-based payloads hold 6 coordinate tokens per bone.

mod file;
mod quantize;
mod shuffle;
mod tokenize;
pub mod vocab;

pub use file::{read_token_file, token_text_dump, write_token_file, FILE_MAGIC, FILE_VERSION};
pub use quantize::{dequantize, quantize};
pub use shuffle::{permutation_probability, randomize_groups, unshuffle_groups};
pub use tokenize::{
    detokenize_bone_based, detokenize_joint_based, tokenize_bone_based, tokenize_joint_based,
    CodecOptions, Diagnostic,
};

use crate::error::{Result, RigError};
use vocab::{BOS, EOS, SHAPE_PLACEHOLDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    JointBased,
    BoneBased,
}

impl Scheme {
    pub fn code(self) -> u8 {
        match self {
            Scheme::JointBased => 0,
            Scheme::BoneBased => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Scheme> {
        match c {
            0 => Some(Scheme::JointBased),
            1 => Some(Scheme::BoneBased),
            _ => None,
        }
    }

    /// Tokens per payload group.
    pub fn group_len(self) -> usize {
        match self {
            Scheme::JointBased => 4,
            Scheme::BoneBased => 6,
        }
    }
}

/// How parent tokens address their parent inside a shuffled stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParentRef {
    /// Position of the parent's group in the emitted stream.
    #[default]
    Emission,
    /// Canonical (unshuffled) index of the parent's group.
    Original,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub scheme: Scheme,
    pub tokens: Vec<u16>,
    pub indicators: Vec<Option<u16>>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn shape_token_count(&self) -> usize {
        self.tokens
            .iter()
            .take_while(|&&t| t == SHAPE_PLACEHOLDER)
            .count()
    }

    /// Index range of the payload: after BOS, up to EOS (or the end).
    pub fn payload_range(&self) -> Result<std::ops::Range<usize>> {
        let start = self.shape_token_count();
        if self.tokens.get(start) != Some(&BOS) {
            return Err(RigError::Codec(format!("expected BOS at position {start}")));
        }
        let end = self.tokens[start + 1..]
            .iter()
            .position(|&t| t == EOS)
            .map_or(self.tokens.len(), |p| start + 1 + p);
        Ok(start + 1..end)
    }

    pub fn payload(&self) -> Result<&[u16]> {
        let r = self.payload_range()?;
        Ok(&self.tokens[r])
    }

    /// True when groups sit in canonical order (indicator of group `g` is `g + 1`).
    pub fn is_sequential(&self) -> bool {
        let Ok(range) = self.payload_range() else {
            return false;
        };
        let g = self.scheme.group_len();
        let groups = range.len() / g;
        if self.scheme == Scheme::BoneBased || groups == 0 {
            return true;
        }
        if self.indicators[range.start - 1] != Some(0) {
            return false;
        }
        (0..groups).all(|e| {
            let want = if e + 1 < groups {
                Some((e + 1) as u16)
            } else {
                None
            };
            self.indicators[range.start + e * g] == want
        })
    }

    pub(crate) fn check_aligned(&self) -> Result<()> {
        if self.tokens.len() != self.indicators.len() {
            return Err(RigError::shape(
                "indicator stream",
                self.tokens.len(),
                self.indicators.len(),
            ));
        }
        Ok(())
    }
}
