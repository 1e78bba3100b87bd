// SPDX-License-Identifier: Apache-2.0

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vocab::{is_parent, parent_token, PARENT_BASE};
use super::{ParentRef, Scheme, TokenSequence};
use crate::error::{Result, RigError};

struct Layout {
    /// Index of the first payload token.
    start: usize,
    groups: usize,
}

fn joint_layout(t: &TokenSequence) -> Result<Layout> {
    t.check_aligned()?;
    if t.scheme != Scheme::JointBased {
        return Err(RigError::Codec(
            "group shuffling needs a joint-based stream".into(),
        ));
    }
    let range = t.payload_range()?;
    if range.len() % 4 != 0 || range.is_empty() {
        return Err(RigError::Codec(
            "payload is not a whole number of joint groups".into(),
        ));
    }
    for g in 0..range.len() / 4 {
        if !is_parent(t.tokens[range.start + 4 * g + 3]) {
            return Err(RigError::Codec(format!("group {g} has no parent token")));
        }
    }
    Ok(Layout {
        start: range.start,
        groups: range.len() / 4,
    })
}

/// Re-emits the joint groups of `t` in the order `perm` (canonical indices),
/// writing target-aware indicators: every token ahead of the first group
/// names `perm[0]`; group `e` names `perm[e + 1]`; the last group and EOS
/// carry none.
fn emit(
    t: &TokenSequence,
    lay: &Layout,
    perm: &[usize],
    parents: ParentRef,
    inverse_map: &[usize],
) -> TokenSequence {
    let mut out = t.clone();
    for (e, &src) in perm.iter().enumerate() {
        let from = lay.start + 4 * src;
        let to = lay.start + 4 * e;
        out.tokens[to..to + 4].copy_from_slice(&t.tokens[from..from + 4]);
        if parents == ParentRef::Emission {
            let off = (t.tokens[from + 3] - PARENT_BASE) as usize;
            if off > 0 && off - 1 < inverse_map.len() {
                out.tokens[to + 3] = parent_token(inverse_map[off - 1] + 1);
            }
        }
        let next = perm.get(e + 1).map(|&n| n as u16);
        for ind in &mut out.indicators[to..to + 4] {
            *ind = next;
        }
    }
    for ind in &mut out.indicators[..lay.start] {
        *ind = Some(perm[0] as u16);
    }
    for ind in &mut out.indicators[lay.start + 4 * lay.groups..] {
        *ind = None;
    }
    out
}

/// With probability `permute_prob`, shuffles the joint groups of a canonical
/// stream using a seeded permutation. Indicators are rewritten either way.
pub fn randomize_groups(
    t: &TokenSequence,
    seed: u64,
    permute_prob: f64,
    parents: ParentRef,
) -> Result<TokenSequence> {
    if !(0.0..=1.0).contains(&permute_prob) {
        return Err(RigError::arg(format!(
            "permutation probability {permute_prob} outside [0, 1]"
        )));
    }
    let lay = joint_layout(t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..lay.groups).collect();
    if rng.random::<f64>() < permute_prob {
        perm.shuffle(&mut rng);
    }
    // Canonical index -> emitted position.
    let mut position = vec![0; lay.groups];
    for (e, &g) in perm.iter().enumerate() {
        position[g] = e;
    }
    Ok(emit(t, &lay, &perm, parents, &position))
}

/// Inverts [`randomize_groups`] using only the indicator stream.
pub fn unshuffle_groups(t: &TokenSequence, parents: ParentRef) -> Result<TokenSequence> {
    let lay = joint_layout(t)?;
    if lay.start == 0 {
        return Err(RigError::Codec("stream has no BOS".into()));
    }
    // Canonical index of the group at each emitted position.
    let mut canonical = Vec::with_capacity(lay.groups);
    for e in 0..lay.groups {
        let carrier = if e == 0 {
            lay.start - 1
        } else {
            lay.start + 4 * (e - 1)
        };
        let ind = t.indicators[carrier]
            .ok_or_else(|| RigError::Codec(format!("missing indicator before group {e}")))?;
        canonical.push(ind as usize);
    }
    if !crate::skeleton::is_permutation(&canonical, lay.groups) {
        return Err(RigError::Codec(
            "indicators do not form a permutation".into(),
        ));
    }
    // Group emitted at `e` goes back to `canonical[e]`.
    let mut perm = vec![0; lay.groups];
    for (e, &c) in canonical.iter().enumerate() {
        perm[c] = e;
    }
    let mut out = emit(t, &lay, &perm, parents, &canonical);
    for g in 0..lay.groups {
        let next = (g + 1 < lay.groups).then_some((g + 1) as u16);
        for ind in &mut out.indicators[lay.start + 4 * g..lay.start + 4 * g + 4] {
            *ind = next;
        }
    }
    for ind in &mut out.indicators[..lay.start] {
        *ind = Some(0);
    }
    Ok(out)
}

/// Annealed permutation probability: 1 for the first half of training,
/// a linear ramp to 0 over the third quarter, then 0.
pub fn permutation_probability(epoch: f64, total_epochs: f64) -> Result<f64> {
    if !(total_epochs > 0.0) || !total_epochs.is_finite() {
        return Err(RigError::arg("total epochs must be positive"));
    }
    if !(0.0..=total_epochs).contains(&epoch) {
        return Err(RigError::arg(format!(
            "epoch {epoch} outside [0, {total_epochs}]"
        )));
    }
    let half = total_epochs / 2.0;
    let three_q = 3.0 * total_epochs / 4.0;
    Ok(if epoch <= half {
        1.0
    } else if epoch <= three_q {
        1.0 - (epoch - half) / (total_epochs / 4.0)
    } else {
        0.0
    })
}
