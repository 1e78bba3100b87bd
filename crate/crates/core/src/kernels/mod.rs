// SPDX-License-Identifier: Apache-2.0

//! Numerical kernels with hand-written backward passes.
//!
//! In the skinning network these kernels are wired as follows: bone
//! embeddings go through topology-aware self-attention ([`taja_attention`]),
//! are cross-attended with shape latents and point features, and the final
//! point and bone features meet in [`skinning_head`]. The learnable layers
//! around them are out of scope; the kernels are what carry the graph-distance
//! bias and the cosine/softmax weight rule.

mod attention;
mod cross_entropy;
mod skinning;

pub use attention::{
    distance_embedding, distance_embedding_backward, scaled_dot_product_attention, taja_attention,
    taja_attention_backward, AttentionGrads, AttentionInputs, AttentionOutput, DistanceBias,
    DistanceEmbeddingTable, DEFAULT_MAX_DISTANCE_LEVEL,
};
pub use cross_entropy::{
    next_token_cross_entropy, next_token_cross_entropy_backward, next_token_targets,
};
pub use skinning::{skinning_head, skinning_head_backward, SkinningHeadGrads, NORM_EPSILON};

use nalgebra::DMatrix;

/// Row-wise softmax with max subtraction.
pub(crate) fn softmax_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    out
}

/// Backward of row-wise softmax: `A ⊙ (dA − rowsum(dA ⊙ A))`.
pub(crate) fn softmax_rows_backward(a: &DMatrix<f64>, grad: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for r in 0..a.nrows() {
        let dot: f64 = (0..a.ncols()).map(|c| a[(r, c)] * grad[(r, c)]).sum();
        for c in 0..a.ncols() {
            out[(r, c)] = a[(r, c)] * (grad[(r, c)] - dot);
        }
    }
    out
}

pub(crate) fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|x| x.is_finite())
}
