// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fmt;

use super::quantize::{dequantize, quantize};
use super::vocab::{
    is_coordinate, is_parent, parent_token, BOS, DEFAULT_SHAPE_TOKENS, EOS, PAD, PARENT_BASE,
    SHAPE_PLACEHOLDER,
};
use super::{Scheme, TokenSequence};
use crate::error::{Result, RigError};
use crate::math::Vec3;
use crate::skeleton::{is_permutation, Skeleton};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodecOptions {
    /// Shape placeholder tokens emitted ahead of BOS.
    pub shape_tokens: usize,
    /// Emit parent references to groups that come later in the stream
    /// instead of rejecting the order. Only useful for reproducing the
    /// failure mode of orders that are not parent-before-child.
    pub allow_forward_parents: bool,
}

impl Default for CodecOptions {
    fn default() -> Self {
        CodecOptions {
            shape_tokens: DEFAULT_SHAPE_TOKENS,
            allow_forward_parents: false,
        }
    }
}

/// Non-fatal problems found while decoding a token stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    MissingEos,
    /// Payload length is not a multiple of the group size; the tail was dropped.
    PartialGroup {
        dropped: usize,
    },
    /// A joint names a parent that has not been emitted yet. The joint is
    /// decoded without a parent.
    ForwardParentReference {
        joint: usize,
        parent: usize,
    },
    /// A second joint claims to be the root.
    ExtraRoot {
        joint: usize,
    },
    /// Decoded skeleton splits into this many trees.
    Disconnected {
        components: usize,
    },
    TrailingTokens {
        count: usize,
    },
    TooManyJoints {
        joints: usize,
    },
    /// Bone-based: a child endpoint that already exists as a joint.
    DuplicateJoint {
        bone: usize,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::MissingEos => write!(f, "missing EOS"),
            Diagnostic::PartialGroup { dropped } => {
                write!(f, "payload not a whole number of groups ({dropped} tokens dropped)")
            }
            Diagnostic::ForwardParentReference { joint, parent } => write!(
                f,
                "forward parent reference: joint {joint} names parent {parent} which is not yet emitted"
            ),
            Diagnostic::ExtraRoot { joint } => write!(f, "joint {joint} is an extra root"),
            Diagnostic::Disconnected { components } => {
                write!(f, "skeleton is disconnected ({components} components)")
            }
            Diagnostic::TrailingTokens { count } => write!(f, "{count} tokens after EOS"),
            Diagnostic::TooManyJoints { joints } => write!(f, "{joints} joints exceeds the cap"),
            Diagnostic::DuplicateJoint { bone } => {
                write!(f, "bone {bone} ends at an existing joint")
            }
        }
    }
}

fn check_order(s: &Skeleton, order: &[usize]) -> Result<Vec<usize>> {
    s.ensure_valid()?;
    if !is_permutation(order, s.len()) {
        return Err(RigError::arg(
            "joint order is not a permutation of the joints",
        ));
    }
    let mut pos = vec![0; s.len()];
    for (e, &j) in order.iter().enumerate() {
        pos[j] = e;
    }
    Ok(pos)
}

fn push_point(tokens: &mut Vec<u16>, p: &Vec3) -> Result<()> {
    for c in p.iter() {
        tokens.push(quantize(*c)?);
    }
    Ok(())
}

fn frame(shape_tokens: usize, payload: Vec<u16>, scheme: Scheme) -> TokenSequence {
    let mut tokens = vec![SHAPE_PLACEHOLDER; shape_tokens];
    tokens.push(BOS);
    let start = tokens.len();
    tokens.extend(payload);
    let end = tokens.len();
    tokens.push(EOS);
    let mut indicators = vec![None; tokens.len()];
    if scheme == Scheme::JointBased {
        let groups = (end - start) / 4;
        for ind in indicators.iter_mut().take(start) {
            *ind = Some(0);
        }
        for g in 0..groups {
            let next = (g + 1 < groups).then_some((g + 1) as u16);
            for ind in &mut indicators[start + 4 * g..start + 4 * g + 4] {
                *ind = next;
            }
        }
    }
    TokenSequence {
        scheme,
        tokens,
        indicators,
    }
}

/// Joint-based stream: per joint in `order`, three coordinate bins and a
/// parent token addressing the parent's emitted position (`+1`, root `0`).
pub fn tokenize_joint_based(
    s: &Skeleton,
    order: &[usize],
    opts: &CodecOptions,
) -> Result<TokenSequence> {
    let pos = check_order(s, order)?;
    let mut payload = Vec::with_capacity(4 * s.len());
    for (e, &j) in order.iter().enumerate() {
        push_point(&mut payload, &s.joints()[j])?;
        let offset = match s.parents()[j] {
            None => 0,
            Some(p) => {
                if pos[p] >= e && !opts.allow_forward_parents {
                    return Err(RigError::Codec(format!(
                        "joint {j} is emitted before its parent {p}"
                    )));
                }
                pos[p] + 1
            }
        };
        payload.push(parent_token(offset));
    }
    Ok(frame(opts.shape_tokens, payload, Scheme::JointBased))
}

/// Bone-based stream: per non-root joint in `order`, the parent endpoint
/// then the joint's own position.
pub fn tokenize_bone_based(
    s: &Skeleton,
    order: &[usize],
    opts: &CodecOptions,
) -> Result<TokenSequence> {
    check_order(s, order)?;
    let mut payload = Vec::with_capacity(6 * s.bone_count());
    for &j in order {
        if let Some(p) = s.parents()[j] {
            push_point(&mut payload, &s.joints()[p])?;
            push_point(&mut payload, &s.joints()[j])?;
        }
    }
    Ok(frame(opts.shape_tokens, payload, Scheme::BoneBased))
}

/// Extracts whole payload groups plus framing diagnostics.
fn split_groups(
    t: &TokenSequence,
    scheme: Scheme,
) -> Result<(Vec<&[u16]>, Vec<Diagnostic>, usize)> {
    t.check_aligned()?;
    if t.scheme != scheme {
        return Err(RigError::Codec(format!(
            "expected {scheme:?} stream, got {:?}",
            t.scheme
        )));
    }
    if t.is_empty() {
        return Err(RigError::Codec("empty token stream".into()));
    }
    let range = t.payload_range()?;
    let mut diags = Vec::new();
    if range.end == t.tokens.len() {
        diags.push(Diagnostic::MissingEos);
    } else {
        let trailing = t.tokens[range.end + 1..]
            .iter()
            .filter(|&&x| x != PAD)
            .count();
        if trailing > 0 {
            diags.push(Diagnostic::TrailingTokens { count: trailing });
        }
    }
    let payload = &t.tokens[range.clone()];
    if let Some(i) = payload
        .iter()
        .position(|&x| !is_coordinate(x) && !is_parent(x))
    {
        return Err(RigError::Codec(format!(
            "unexpected token {} at position {}",
            payload[i],
            range.start + i
        )));
    }
    let g = scheme.group_len();
    let dropped = payload.len() % g;
    if dropped != 0 {
        diags.push(Diagnostic::PartialGroup { dropped });
    }
    let groups: Vec<&[u16]> = payload.chunks_exact(g).collect();
    if groups.is_empty() {
        return Err(RigError::Codec("stream contains no complete group".into()));
    }
    Ok((groups, diags, range.start))
}

fn coord(tokens: &[u16], at: usize) -> Result<Vec3> {
    let mut p = [0.0; 3];
    for (k, c) in p.iter_mut().enumerate() {
        let tok = tokens[k];
        if !is_coordinate(tok) {
            return Err(RigError::Codec(format!(
                "expected coordinate token at position {}, got {tok}",
                at + k
            )));
        }
        *c = dequantize(tok);
    }
    Ok(Vec3::new(p[0], p[1], p[2]))
}

fn count_roots(parents: &[Option<usize>]) -> usize {
    parents.iter().filter(|p| p.is_none()).count()
}

/// Decodes a canonical (unshuffled) joint-based stream. Joints come back in
/// emission order at bin centres.
pub fn detokenize_joint_based(t: &TokenSequence) -> Result<(Skeleton, Vec<Diagnostic>)> {
    let (groups, mut diags, start) = split_groups(t, Scheme::JointBased)?;
    let mut joints = Vec::with_capacity(groups.len());
    let mut parents = Vec::with_capacity(groups.len());
    let mut has_root = false;
    for (e, g) in groups.iter().enumerate() {
        let at = start + 4 * e;
        joints.push(coord(&g[..3], at)?);
        let ptok = g[3];
        if !is_parent(ptok) {
            return Err(RigError::Codec(format!(
                "expected parent token at position {}, got {ptok}",
                at + 3
            )));
        }
        let offset = (ptok - PARENT_BASE) as usize;
        let parent = if offset == 0 {
            if has_root {
                diags.push(Diagnostic::ExtraRoot { joint: e });
            }
            has_root = true;
            None
        } else if offset > e {
            diags.push(Diagnostic::ForwardParentReference {
                joint: e,
                parent: offset - 1,
            });
            None
        } else {
            Some(offset - 1)
        };
        parents.push(parent);
    }
    finish(joints, parents, diags)
}

fn finish(
    joints: Vec<Vec3>,
    parents: Vec<Option<usize>>,
    mut diags: Vec<Diagnostic>,
) -> Result<(Skeleton, Vec<Diagnostic>)> {
    let roots = count_roots(&parents);
    if roots > 1 {
        diags.push(Diagnostic::Disconnected { components: roots });
    }
    if joints.len() > crate::MAX_JOINTS {
        diags.push(Diagnostic::TooManyJoints {
            joints: joints.len(),
        });
    }
    Ok((Skeleton::new(joints, parents), diags))
}

/// Decodes a bone-based stream by identifying endpoints with equal bins.
pub fn detokenize_bone_based(t: &TokenSequence) -> Result<(Skeleton, Vec<Diagnostic>)> {
    let (groups, mut diags, start) = split_groups(t, Scheme::BoneBased)?;
    let mut index: HashMap<[u16; 3], usize> = HashMap::new();
    let mut joints = Vec::new();
    let mut parents: Vec<Option<usize>> = Vec::new();
    for (b, g) in groups.iter().enumerate() {
        let at = start + 6 * b;
        let pa = coord(&g[..3], at)?;
        let ch = coord(&g[3..], at + 3)?;
        let pkey = [g[0], g[1], g[2]];
        let ckey = [g[3], g[4], g[5]];
        let p = match index.get(&pkey) {
            Some(&p) => p,
            None => {
                if b > 0 {
                    diags.push(Diagnostic::ForwardParentReference {
                        joint: joints.len(),
                        parent: joints.len(),
                    });
                }
                joints.push(pa);
                parents.push(None);
                index.insert(pkey, joints.len() - 1);
                joints.len() - 1
            }
        };
        if index.contains_key(&ckey) {
            diags.push(Diagnostic::DuplicateJoint { bone: b });
            continue;
        }
        joints.push(ch);
        parents.push(Some(p));
        index.insert(ckey, joints.len() - 1);
    }
    finish(joints, parents, diags)
}
