// SPDX-License-Identifier: Apache-2.0

//! Cosine-similarity skinning head: `W = softmax_j(α · cos(f_point, f_bone))`.

use nalgebra::DMatrix;

use super::{all_finite, softmax_rows, softmax_rows_backward};
use crate::error::{Result, RigError};

/// Added to every feature norm so zero rows produce finite cosines.
pub const NORM_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SkinningHeadGrads {
    pub point_features: DMatrix<f64>,
    pub bone_features: DMatrix<f64>,
    pub alpha: f64,
}

fn row_norms(m: &DMatrix<f64>) -> Vec<f64> {
    m.row_iter().map(|r| r.norm()).collect()
}

fn cosines(fp: &DMatrix<f64>, fb: &DMatrix<f64>, np: &[f64], nb: &[f64]) -> DMatrix<f64> {
    let dots = fp * fb.transpose();
    DMatrix::from_fn(fp.nrows(), fb.nrows(), |i, j| {
        dots[(i, j)] / ((np[i] + NORM_EPSILON) * (nb[j] + NORM_EPSILON))
    })
}

fn check(fp: &DMatrix<f64>, fb: &DMatrix<f64>, alpha: f64) -> Result<()> {
    if fb.nrows() == 0 {
        return Err(RigError::arg(
            "skinning head needs at least one bone feature",
        ));
    }
    if fp.ncols() != fb.ncols() {
        return Err(RigError::shape("feature width", fp.ncols(), fb.ncols()));
    }
    if !all_finite(fp) || !all_finite(fb) || !alpha.is_finite() {
        return Err(RigError::NonFinite("skinning head inputs"));
    }
    Ok(())
}

/// Returns the `n × j` weight matrix; every row is a simplex.
pub fn skinning_head(fp: &DMatrix<f64>, fb: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    check(fp, fb, alpha)?;
    let (np, nb) = (row_norms(fp), row_norms(fb));
    Ok(softmax_rows(&(cosines(fp, fb, &np, &nb) * alpha)))
}

/// Gradients of `Σ grad ⊙ W`.
pub fn skinning_head_backward(
    fp: &DMatrix<f64>,
    fb: &DMatrix<f64>,
    alpha: f64,
    grad: &DMatrix<f64>,
) -> Result<SkinningHeadGrads> {
    check(fp, fb, alpha)?;
    let (n, j) = (fp.nrows(), fb.nrows());
    if grad.shape() != (n, j) {
        return Err(RigError::shape(
            "weight gradient",
            format!("{n}x{j}"),
            format!("{:?}", grad.shape()),
        ));
    }
    let (np, nb) = (row_norms(fp), row_norms(fb));
    let cos = cosines(fp, fb, &np, &nb);
    let w = softmax_rows(&(&cos * alpha));
    let dlogits = softmax_rows_backward(&w, grad);
    let dalpha = dlogits.component_mul(&cos).sum();
    let dcos = dlogits * alpha;

    let mut gp = DMatrix::zeros(n, fp.ncols());
    let mut gb = DMatrix::zeros(j, fb.ncols());
    for i in 0..n {
        let pe = np[i] + NORM_EPSILON;
        // d|p|/dp = p/|p|, taken as zero at the origin.
        let inv = if np[i] > 0.0 { 1.0 / np[i] } else { 0.0 };
        for k in 0..j {
            let be = nb[k] + NORM_EPSILON;
            let binv = if nb[k] > 0.0 { 1.0 / nb[k] } else { 0.0 };
            let g = dcos[(i, k)];
            if g == 0.0 {
                continue;
            }
            let c = cos[(i, k)];
            for d in 0..fp.ncols() {
                gp[(i, d)] += g * (fb[(k, d)] / (pe * be) - c / pe * fp[(i, d)] * inv);
                gb[(k, d)] += g * (fp[(i, d)] / (pe * be) - c / be * fb[(k, d)] * binv);
            }
        }
    }
    Ok(SkinningHeadGrads {
        point_features: gp,
        bone_features: gb,
        alpha: dalpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_bones_give_uniform_rows() {
        let fp = DMatrix::from_fn(4, 3, |i, d| (i * 3 + d) as f64 - 5.0);
        let fb = DMatrix::from_fn(5, 3, |_, d| d as f64 + 1.0);
        let w = skinning_head(&fp, &fb, 7.0).unwrap();
        assert!(w.iter().all(|&x| (x - 0.2).abs() < 1e-15));
    }

    #[test]
    fn zero_alpha_is_uniform() {
        let fp = DMatrix::from_fn(3, 2, |i, d| (i + 2 * d) as f64);
        let fb = DMatrix::from_fn(4, 2, |i, d| (i as f64) - d as f64);
        let w = skinning_head(&fp, &fb, 0.0).unwrap();
        assert!(w.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn zero_rows_stay_finite() {
        let fp = DMatrix::zeros(2, 4);
        let mut fb = DMatrix::from_element(3, 4, 1.0);
        fb.row_mut(1).fill(0.0);
        let w = skinning_head(&fp, &fb, 50.0).unwrap();
        assert!(w.iter().all(|x| x.is_finite()));
        let g = skinning_head_backward(&fp, &fb, 50.0, &DMatrix::from_element(2, 3, 1.0)).unwrap();
        assert!(g.point_features.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn width_mismatch_rejected() {
        assert!(skinning_head(&DMatrix::zeros(2, 3), &DMatrix::zeros(2, 4), 1.0).is_err());
    }
}
