use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::cell::{backward, forward_sequence, LstmParams};
use super::features::FeatureSample;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
    Sgd,
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub hidden_size: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub clip_norm: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 1e-2,
            seed: 0,
            hidden_size: 16,
            batch_size: 32,
            optimizer: Optimizer::default(),
            clip_norm: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.hidden_size == 0 || self.batch_size == 0 {
            return Err(Error::Config("hidden_size and batch_size must be at least 1".into()));
        }
        if !(self.clip_norm > 0.0) {
            return Err(Error::Config(format!("clip_norm {} must be positive", self.clip_norm)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: LstmParams,
    /// Mean squared error over each epoch's samples, measured before that epoch's updates.
    pub loss_trace: Vec<f64>,
}

struct Adam {
    m: LstmParams,
    v: LstmParams,
    step: i32,
}

/// Fits an LSTM to `samples` by minimising mean squared error.
///
/// The run is a pure function of `(samples, cfg)`: weights are initialised from
/// `cfg.seed`, the same generator reshuffles the sample order each epoch, and updates are
/// applied sequentially in that order.
pub fn train(samples: &[FeatureSample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let first = samples.first().ok_or(Error::Empty)?;
    let input_size = first.input_size();
    if input_size == 0
        || samples
            .iter()
            .any(|s| s.input_size() != input_size || s.inputs.is_empty())
    {
        return Err(Error::Shape("samples have inconsistent input sizes".into()));
    }

    let mut rng = rng_from_seed(cfg.seed);
    let mut params = LstmParams::init(cfg.hidden_size, input_size, &mut rng);
    let mut adam = Adam {
        m: LstmParams::zeros(cfg.hidden_size, input_size),
        v: LstmParams::zeros(cfg.hidden_size, input_size),
        step: 0,
    };
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = LstmParams::zeros(cfg.hidden_size, input_size);
            let scale = 2.0 / batch.len() as f64;
            for &idx in batch {
                let sample = &samples[idx];
                let (pred, cache) = forward_sequence(&params, sample)?;
                let err = pred - sample.target;
                epoch_loss += err * err;
                grad.add_assign(&backward(&params, sample, &cache, scale * err)?);
            }
            let norm = grad.norm();
            if !norm.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            if norm > cfg.clip_norm {
                grad.scale(cfg.clip_norm / norm);
            }
            apply_update(&mut params, &grad, &mut adam, cfg);
        }
        let mse = epoch_loss / samples.len() as f64;
        if !mse.is_finite() || !params.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        loss_trace.push(mse);
    }
    Ok(TrainOutcome { params, loss_trace })
}

fn apply_update(params: &mut LstmParams, grad: &LstmParams, adam: &mut Adam, cfg: &TrainConfig) {
    let lr = cfg.learning_rate;
    match cfg.optimizer {
        Optimizer::Sgd => {
            for (p, g) in params.groups_mut().into_iter().zip(grad.groups()) {
                p.iter_mut().zip(g).for_each(|(p, g)| *p -= lr * g);
            }
        }
        Optimizer::Adam { beta1, beta2, epsilon } => {
            adam.step += 1;
            let c1 = 1.0 - beta1.powi(adam.step);
            let c2 = 1.0 - beta2.powi(adam.step);
            let groups = params
                .groups_mut()
                .into_iter()
                .zip(grad.groups())
                .zip(adam.m.groups_mut())
                .zip(adam.v.groups_mut());
            for (((p, g), m), v) in groups {
                for k in 0..p.len() {
                    m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                    v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
                    p[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + epsilon);
                }
            }
        }
    }
}
