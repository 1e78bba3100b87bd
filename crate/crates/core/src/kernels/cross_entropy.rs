// SPDX-License-Identifier: Apache-2.0

//! Masked next-token cross-entropy.

use nalgebra::DMatrix;

use super::softmax_rows;
use crate::codec::{vocab, TokenSequence};
use crate::error::{Result, RigError};

fn check(logits: &DMatrix<f64>, targets: &[usize], mask: &[bool]) -> Result<usize> {
    let l = logits.nrows();
    if targets.len() != l || mask.len() != l {
        return Err(RigError::shape(
            "targets/mask",
            l,
            format!("{}/{}", targets.len(), mask.len()),
        ));
    }
    if let Some(&t) = targets
        .iter()
        .zip(mask)
        .find(|(t, &m)| m && **t >= logits.ncols())
        .map(|(t, _)| t)
    {
        return Err(RigError::arg(format!(
            "target {t} outside vocabulary of {}",
            logits.ncols()
        )));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(RigError::arg("mask selects no positions"));
    }
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(RigError::NonFinite("logits"));
    }
    Ok(count)
}

/// Mean of `logsumexp(row) − row[target]` over unmasked rows.
pub fn next_token_cross_entropy(
    logits: &DMatrix<f64>,
    targets: &[usize],
    mask: &[bool],
) -> Result<f64> {
    let count = check(logits, targets, mask)?;
    let mut total = 0.0;
    for (r, row) in logits.row_iter().enumerate() {
        if !mask[r] {
            continue;
        }
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        total += lse - row[targets[r]];
    }
    Ok(total / count as f64)
}

/// Gradient of the mean loss with respect to the logits.
pub fn next_token_cross_entropy_backward(
    logits: &DMatrix<f64>,
    targets: &[usize],
    mask: &[bool],
) -> Result<DMatrix<f64>> {
    let count = check(logits, targets, mask)? as f64;
    let mut g = softmax_rows(logits);
    for r in 0..g.nrows() {
        if mask[r] {
            g[(r, targets[r])] -= 1.0;
            g.row_mut(r).scale_mut(1.0 / count);
        } else {
            g.row_mut(r).fill(0.0);
        }
    }
    Ok(g)
}

/// Teacher-forcing targets: position `t` predicts token `t + 1`.
///
/// Positions inside the shape prefix, and positions whose target is PAD,
/// are masked out.
pub fn next_token_targets(seq: &TokenSequence) -> (Vec<usize>, Vec<bool>) {
    let n = seq.tokens.len().saturating_sub(1);
    let first = seq.shape_token_count();
    let targets: Vec<usize> = seq.tokens[1..].iter().map(|&t| t as usize).collect();
    let mask = (0..n)
        .map(|t| t >= first && seq.tokens[t + 1] != vocab::PAD)
        .collect();
    (targets, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{tokenize_joint_based, CodecOptions};
    use crate::fixtures::random_skeleton;

    #[test]
    fn confident_logits_have_near_zero_loss() {
        let mut l = DMatrix::zeros(3, 10);
        for (r, t) in [2, 5, 9].iter().enumerate() {
            l[(r, *t)] = 1e6;
        }
        let loss = next_token_cross_entropy(&l, &[2, 5, 9], &[true; 3]).unwrap();
        assert!(loss.abs() < 1e-12);
    }

    #[test]
    fn uniform_logits_give_log_vocab() {
        let l = DMatrix::zeros(4, vocab::VOCAB_SIZE);
        let loss = next_token_cross_entropy(&l, &[0, 1, 2, 3], &[true; 4]).unwrap();
        assert!((loss - (203f64).ln()).abs() < 1e-12);
        assert!((loss - 5.313).abs() < 1e-3);
    }

    #[test]
    fn masked_rows_ignored() {
        let mut l = DMatrix::zeros(2, 4);
        l[(1, 0)] = 100.0;
        let a = next_token_cross_entropy(&l, &[1, 1], &[true, false]).unwrap();
        assert!((a - 4f64.ln()).abs() < 1e-12);
        let g = next_token_cross_entropy_backward(&l, &[1, 1], &[true, false]).unwrap();
        assert!(g.row(1).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn empty_mask_and_bad_target_rejected() {
        let l = DMatrix::zeros(2, 4);
        assert!(next_token_cross_entropy(&l, &[0, 0], &[false, false]).is_err());
        assert!(next_token_cross_entropy(&l, &[0, 4], &[true, true]).is_err());
    }

    #[test]
    fn targets_skip_shape_prefix() {
        let s = random_skeleton(1, 3);
        let opts = CodecOptions {
            shape_tokens: 5,
            ..Default::default()
        };
        let seq = tokenize_joint_based(&s, &s.hierarchical_order().unwrap(), &opts).unwrap();
        let (t, m) = next_token_targets(&seq);
        assert_eq!(t.len(), seq.tokens.len() - 1);
        assert_eq!(m.iter().filter(|&&x| x).count(), 12 + 1);
        assert_eq!(*t.last().unwrap(), vocab::EOS as usize);
    }
}
