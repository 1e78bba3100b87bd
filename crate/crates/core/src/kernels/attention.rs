// SPDX-License-Identifier: Apache-2.0

//! Topology-aware joint attention: scaled dot-product attention whose logits
//! receive `λ · E_dis`, a per-head bias looked up from skeletal hop distances.

use nalgebra::DMatrix;

use super::{all_finite, softmax_rows, softmax_rows_backward};
use crate::error::{Result, RigError};
use crate::skeleton::DistanceMatrix;

/// Distances at or beyond this level share the last table entry.
pub const DEFAULT_MAX_DISTANCE_LEVEL: usize = 16;

/// Learnable scalar per (distance level, head).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceEmbeddingTable {
    max_level: usize,
    heads: usize,
    values: Vec<f64>,
}

impl DistanceEmbeddingTable {
    pub fn zeros(max_level: usize, heads: usize) -> Self {
        DistanceEmbeddingTable {
            max_level,
            heads,
            values: vec![0.0; (max_level + 1) * heads],
        }
    }

    /// `values[level * heads + head]`, levels `0..=max_level`.
    pub fn from_values(max_level: usize, heads: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != (max_level + 1) * heads {
            return Err(RigError::shape(
                "distance table",
                (max_level + 1) * heads,
                values.len(),
            ));
        }
        Ok(DistanceEmbeddingTable {
            max_level,
            heads,
            values,
        })
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, distance: u32, head: usize) -> f64 {
        self.values[self.level(distance) * self.heads + head]
    }

    fn level(&self, distance: u32) -> usize {
        (distance as usize).min(self.max_level)
    }
}

/// Per-head `j × j` bias.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceBias {
    pub heads: Vec<DMatrix<f64>>,
}

pub fn distance_embedding(d: &DistanceMatrix, table: &DistanceEmbeddingTable) -> DistanceBias {
    let j = d.len();
    DistanceBias {
        heads: (0..table.heads())
            .map(|h| DMatrix::from_fn(j, j, |a, b| table.get(d.get(a, b), h)))
            .collect(),
    }
}

/// Scatters a gradient on the bias back onto table entries.
pub fn distance_embedding_backward(
    d: &DistanceMatrix,
    grad: &DistanceBias,
    table: &DistanceEmbeddingTable,
) -> Vec<f64> {
    let mut out = vec![0.0; table.values.len()];
    for (h, g) in grad.heads.iter().enumerate() {
        for a in 0..d.len() {
            for b in 0..d.len() {
                out[table.level(d.get(a, b)) * table.heads + h] += g[(a, b)];
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct AttentionInputs {
    /// Per-head `j × d_k` queries.
    pub q: Vec<DMatrix<f64>>,
    pub k: Vec<DMatrix<f64>>,
    pub v: Vec<DMatrix<f64>>,
    pub bias: DistanceBias,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    pub output: Vec<DMatrix<f64>>,
    pub attention: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct AttentionGrads {
    pub q: Vec<DMatrix<f64>>,
    pub k: Vec<DMatrix<f64>>,
    pub v: Vec<DMatrix<f64>>,
    pub lambda: f64,
    pub bias: DistanceBias,
}

fn logits(q: &DMatrix<f64>, k: &DMatrix<f64>) -> DMatrix<f64> {
    let scale = (q.ncols() as f64).sqrt();
    (q * k.transpose()) / scale
}

/// Standard softmax attention without any bias, per head.
pub fn scaled_dot_product_attention(
    q: &[DMatrix<f64>],
    k: &[DMatrix<f64>],
    v: &[DMatrix<f64>],
) -> AttentionOutput {
    let mut output = Vec::with_capacity(q.len());
    let mut attention = Vec::with_capacity(q.len());
    for h in 0..q.len() {
        let a = softmax_rows(&logits(&q[h], &k[h]));
        output.push(&a * &v[h]);
        attention.push(a);
    }
    AttentionOutput { output, attention }
}

fn check_inputs(inp: &AttentionInputs) -> Result<()> {
    let h = inp.q.len();
    if h == 0 || inp.k.len() != h || inp.v.len() != h || inp.bias.heads.len() != h {
        return Err(RigError::shape(
            "attention heads",
            h,
            format!(
                "k={} v={} bias={}",
                inp.k.len(),
                inp.v.len(),
                inp.bias.heads.len()
            ),
        ));
    }
    let (j, dk) = inp.q[0].shape();
    if dk == 0 {
        return Err(RigError::arg("d_k must be at least 1"));
    }
    for head in 0..h {
        for (what, m) in [("q", &inp.q[head]), ("k", &inp.k[head])] {
            if m.shape() != (j, dk) {
                return Err(RigError::shape(
                    what,
                    format!("{j}x{dk}"),
                    format!("{:?}", m.shape()),
                ));
            }
        }
        if inp.v[head].nrows() != j {
            return Err(RigError::shape("v rows", j, inp.v[head].nrows()));
        }
        if inp.bias.heads[head].shape() != (j, j) {
            return Err(RigError::shape(
                "bias",
                format!("{j}x{j}"),
                format!("{:?}", inp.bias.heads[head].shape()),
            ));
        }
        if !(all_finite(&inp.q[head])
            && all_finite(&inp.k[head])
            && all_finite(&inp.v[head])
            && all_finite(&inp.bias.heads[head]))
        {
            return Err(RigError::NonFinite("attention inputs"));
        }
    }
    if !inp.lambda.is_finite() {
        return Err(RigError::NonFinite("lambda"));
    }
    Ok(())
}

/// `softmax(QKᵀ/√d_k + λ·E_dis) V` for every head.
pub fn taja_attention(inp: &AttentionInputs) -> Result<AttentionOutput> {
    check_inputs(inp)?;
    let mut output = Vec::with_capacity(inp.q.len());
    let mut attention = Vec::with_capacity(inp.q.len());
    for h in 0..inp.q.len() {
        let mut s = logits(&inp.q[h], &inp.k[h]);
        s.zip_apply(&inp.bias.heads[h], |x, e| *x += inp.lambda * e);
        let a = softmax_rows(&s);
        output.push(&a * &inp.v[h]);
        attention.push(a);
    }
    Ok(AttentionOutput { output, attention })
}

/// Gradients of `Σ grad_output ⊙ output` with respect to every input.
pub fn taja_attention_backward(
    inp: &AttentionInputs,
    out: &AttentionOutput,
    grad_output: &[DMatrix<f64>],
) -> AttentionGrads {
    let heads = inp.q.len();
    let mut g = AttentionGrads {
        q: Vec::with_capacity(heads),
        k: Vec::with_capacity(heads),
        v: Vec::with_capacity(heads),
        lambda: 0.0,
        bias: DistanceBias {
            heads: Vec::with_capacity(heads),
        },
    };
    for h in 0..heads {
        let a = &out.attention[h];
        let scale = (inp.q[h].ncols() as f64).sqrt();
        g.v.push(a.transpose() * &grad_output[h]);
        let da = &grad_output[h] * inp.v[h].transpose();
        let ds = softmax_rows_backward(a, &da);
        g.q.push(&ds * &inp.k[h] / scale);
        g.k.push(ds.transpose() * &inp.q[h] / scale);
        g.lambda += ds.component_mul(&inp.bias.heads[h]).sum();
        g.bias.heads.push(ds * inp.lambda);
    }
    g
}
