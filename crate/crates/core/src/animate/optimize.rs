// SPDX-License-Identifier: Apache-2.0

use super::{smoothness_regularizer, tracking_loss, AnimParams, Rig, SmoothnessWeights, TrackSet};
use crate::error::{Result, RigError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    /// Cosine decay from `learning_rate` down to this fraction of it.
    pub final_lr_fraction: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub iterations: usize,
    /// Stop when the best objective improved by less than
    /// `min_relative_improvement` over this many iterations.
    pub patience: usize,
    pub min_relative_improvement: f64,
    pub lambda_reg: f64,
    pub smoothness: SmoothnessWeights,
    /// Iterations before the divergence check starts.
    pub warmup: usize,
    pub divergence_factor: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.01,
            final_lr_fraction: 1.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            iterations: 1000,
            patience: 50,
            min_relative_improvement: 1e-6,
            lambda_reg: 1e-3,
            smoothness: SmoothnessWeights::default(),
            warmup: 10,
            divergence_factor: 1e3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && (0.0..=1.0).contains(&self.final_lr_fraction)
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0
            && self.lambda_reg >= 0.0
            && self.smoothness.rotation >= 0.0
            && self.smoothness.translation >= 0.0
            && self.divergence_factor > 1.0;
        if !ok {
            return Err(RigError::arg("invalid optimizer configuration"));
        }
        Ok(())
    }

    fn lr(&self, it: usize) -> f64 {
        if self.iterations <= 1 {
            return self.learning_rate;
        }
        let p = it as f64 / (self.iterations - 1) as f64;
        let f = self.final_lr_fraction
            + (1.0 - self.final_lr_fraction) * 0.5 * (1.0 + (std::f64::consts::PI * p).cos());
        self.learning_rate * f
    }
}

/// `tracking / observations + λ · smoothness`.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub value: f64,
    pub tracking: f64,
    pub smoothness: f64,
    pub grad: Vec<f64>,
    pub dropped: usize,
}

pub fn objective(
    params: &AnimParams,
    rig: &Rig,
    tracks: &TrackSet,
    cfg: &OptimizerConfig,
) -> Result<Objective> {
    let t = tracking_loss(params, rig, tracks)?;
    let (r, rg) = smoothness_regularizer(params, &cfg.smoothness);
    let obs = (tracks.observations_per_frame() * tracks.frame_count()).max(1) as f64;
    let grad = t
        .grad
        .iter()
        .zip(&rg)
        .map(|(a, b)| a / obs + cfg.lambda_reg * b)
        .collect();
    Ok(Objective {
        value: t.value / obs + cfg.lambda_reg * r,
        tracking: t.value,
        smoothness: r,
        grad,
        dropped: t.dropped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    /// Parameters with the lowest objective seen.
    pub params: AnimParams,
    /// Objective at every evaluated iterate.
    pub trace: Vec<f64>,
    /// Best-so-far envelope of `trace`.
    pub best_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub dropped: usize,
}

/// Adam from identity; quaternions are renormalized after every step.
pub fn optimize(rig: &Rig, tracks: &TrackSet, cfg: &OptimizerConfig) -> Result<OptimizeResult> {
    let init = AnimParams::identity(tracks.frame_count(), rig.skeleton.len());
    optimize_from(rig, tracks, init, cfg)
}

pub fn optimize_from(
    rig: &Rig,
    tracks: &TrackSet,
    init: AnimParams,
    cfg: &OptimizerConfig,
) -> Result<OptimizeResult> {
    cfg.validate()?;
    init.validate()?;
    let mut params = init;
    let mut x = params.to_flat();
    let n = x.len();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut trace = Vec::new();
    let mut best_trace: Vec<f64> = Vec::new();
    let mut best = params.clone();
    let mut best_value = f64::INFINITY;
    let mut initial = None;
    let mut converged = false;
    let mut dropped = 0;

    for it in 0..=cfg.iterations {
        let obj = objective(&params, rig, tracks, cfg)?;
        if !obj.value.is_finite() {
            return Err(RigError::Diverged {
                iteration: it,
                loss: obj.value,
                limit: initial.unwrap_or(0.0) * cfg.divergence_factor,
            });
        }
        let init_value = *initial.get_or_insert(obj.value);
        let limit = init_value * cfg.divergence_factor;
        if it >= cfg.warmup && init_value > 0.0 && obj.value > limit {
            return Err(RigError::Diverged {
                iteration: it,
                loss: obj.value,
                limit,
            });
        }
        trace.push(obj.value);
        if obj.value < best_value {
            best_value = obj.value;
            best = params.clone();
            dropped = obj.dropped;
        }
        best_trace.push(best_value);
        if best_value == 0.0 {
            converged = true;
            break;
        }
        if it >= cfg.patience {
            let then = best_trace[it - cfg.patience];
            if (then - best_value) <= cfg.min_relative_improvement * then.abs() {
                converged = true;
                break;
            }
        }
        if it == cfg.iterations {
            break;
        }
        let lr = cfg.lr(it);
        let t = (it + 1) as i32;
        let (c1, c2) = (1.0 - cfg.beta1.powi(t), 1.0 - cfg.beta2.powi(t));
        for k in 0..n {
            let g = obj.grad[k];
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
            x[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + cfg.epsilon);
        }
        params.set_flat(&x);
        params.renormalize();
        x = params.to_flat();
    }
    Ok(OptimizeResult {
        params: best,
        iterations: trace.len() - 1,
        trace,
        best_trace,
        converged,
        dropped,
    })
}
