// SPDX-License-Identifier: Apache-2.0

use crate::error::{Result, RigError};

/// Row-major `vertices × joints` skinning weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SkinWeights {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

impl SkinWeights {
    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(RigError::shape("skin weights", rows * cols, data.len()));
        }
        Ok(SkinWeights { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(RigError::shape("skin weight row", cols, bad.len()));
        }
        Ok(SkinWeights {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        SkinWeights {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Every vertex fully bound to `joint_of[v]`.
    pub fn one_hot(cols: usize, joint_of: &[usize]) -> Self {
        let mut w = SkinWeights::zeros(joint_of.len(), cols);
        for (v, &j) in joint_of.iter().enumerate() {
            w.data[v * cols + j] = 1.0;
        }
        w
    }

    pub fn vertex_count(&self) -> usize {
        self.rows
    }

    pub fn joint_count(&self) -> usize {
        self.cols
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.data[v * self.cols..(v + 1) * self.cols]
    }

    pub fn row_mut(&mut self, v: usize) -> &mut [f64] {
        &mut self.data[v * self.cols..(v + 1) * self.cols]
    }

    pub fn get(&self, v: usize, j: usize) -> f64 {
        self.data[v * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// Rows that break the simplex invariant: entries outside `[0, 1]` or a
    /// sum off by more than [`ROW_SUM_TOLERANCE`].
    pub fn invalid_rows(&self) -> Vec<usize> {
        (0..self.rows)
            .filter(|&v| {
                let r = self.row(v);
                let sum: f64 = r.iter().sum();
                r.iter().any(|&w| !(0.0..=1.0).contains(&w))
                    || (sum - 1.0).abs() > ROW_SUM_TOLERANCE
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        match self.invalid_rows().first() {
            None => Ok(()),
            Some(v) => Err(RigError::arg(format!(
                "skin weight row {v} is not a simplex"
            ))),
        }
    }

    pub fn check_shape(&self, vertices: usize, joints: usize) -> Result<()> {
        if self.rows != vertices || self.cols != joints {
            return Err(RigError::shape(
                "skin weights",
                format!("{vertices}x{joints}"),
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_check() {
        let w = SkinWeights::from_rows(&[vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        assert!(w.validate().is_ok());
        let w = SkinWeights::from_rows(&[vec![0.5, 0.6]]).unwrap();
        assert_eq!(w.invalid_rows(), vec![0]);
        let w = SkinWeights::from_rows(&[vec![1.2, -0.2]]).unwrap();
        assert_eq!(w.invalid_rows(), vec![0]);
    }

    #[test]
    fn flat_shape_checked() {
        assert!(SkinWeights::from_flat(2, 3, vec![0.0; 5]).is_err());
        assert!(SkinWeights::from_rows(&[vec![1.0], vec![0.5, 0.5]]).is_err());
    }
}
