//! Mini-batch training: Adam, seeded shuffling, sparse categorical
//! cross-entropy on the softmax output.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use super::model::{Model, CLASSES};
use super::tensor::{softmax_rows, Real};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl TrainConfig {
    pub fn new(epochs: usize, seed: u64) -> Self {
        TrainConfig {
            epochs,
            seed,
            batch_size: 128,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
        }
    }
}

/// Flattened supervised data: `n` rows of `dim` values with 0/1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainData<T> {
    pub x: Vec<T>,
    pub y: Vec<u8>,
    pub dim: usize,
}

impl<T: Real> TrainData<T> {
    pub fn new(x: Vec<T>, y: Vec<u8>, dim: usize) -> Self {
        debug_assert_eq!(x.len(), y.len() * dim);
        TrainData { x, y, dim }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainError {
    EmptyDataset,
    ShapeMismatch {
        data_dim: usize,
        model_dim: usize,
    },
    /// Training diverged; carries the first non-finite batch.
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
    },
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyDataset => f.write_str("training set is empty"),
            TrainError::ShapeMismatch {
                data_dim,
                model_dim,
            } => {
                write!(
                    f,
                    "data dimension {data_dim} does not match model input {model_dim}"
                )
            }
            TrainError::NonFiniteLoss { epoch, batch } => {
                write!(f, "loss became non-finite at epoch {epoch}, batch {batch}")
            }
        }
    }
}

impl core::error::Error for TrainError {}

/// Adam optimizer state (first/second moment estimates per parameter).
pub struct Adam<T> {
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    t: u32,
}

impl<T: Real> Adam<T> {
    pub fn new(model: &mut Model<T>) -> Self {
        let sizes: Vec<usize> = model
            .layers
            .iter_mut()
            .flat_map(|l| {
                l.params_grads()
                    .into_iter()
                    .map(|(p, _)| p.len())
                    .collect::<Vec<_>>()
            })
            .collect();
        Adam {
            m: sizes.iter().map(|&s| vec![T::zero(); s]).collect(),
            v: sizes.iter().map(|&s| vec![T::zero(); s]).collect(),
            t: 0,
        }
    }

    /// One update: consumes and zeroes the accumulated gradients.
    pub fn step(&mut self, model: &mut Model<T>, cfg: &TrainConfig) {
        self.t += 1;
        let b1 = T::from_f64(cfg.beta1);
        let b2 = T::from_f64(cfg.beta2);
        let one = T::one();
        let lr = T::from_f64(cfg.learning_rate);
        let eps = T::from_f64(cfg.epsilon);
        let c1 = T::from_f64(1.0 / (1.0 - num_traits::Float::powi(cfg.beta1, self.t as i32)));
        let c2 = T::from_f64(1.0 / (1.0 - num_traits::Float::powi(cfg.beta2, self.t as i32)));
        let mut slot = 0;
        for layer in model.layers.iter_mut() {
            for (p, g) in layer.params_grads() {
                let (m, v) = (&mut self.m[slot], &mut self.v[slot]);
                slot += 1;
                for i in 0..p.len() {
                    let gi = g[i];
                    m[i] = b1 * m[i] + (one - b1) * gi;
                    v[i] = b2 * v[i] + (one - b2) * gi * gi;
                    let mhat = m[i] * c1;
                    let vhat = v[i] * c2;
                    p[i] = p[i] - lr * mhat / (vhat.sqrt() + eps);
                    g[i] = T::zero();
                }
            }
        }
    }
}

/// Mean cross-entropy over a batch of logits, plus the logit gradient
/// (softmax minus one-hot, divided by batch size) and the correct count.
/// Loss accumulates in f64.
pub fn softmax_xent_batch<T: Real>(logits: &[T], labels: &[u8]) -> (f64, Vec<T>, usize) {
    let batch = labels.len();
    let mut p = logits.to_vec();
    softmax_rows(&mut p, batch, CLASSES);
    let mut loss = 0.0f64;
    let mut correct = 0usize;
    let scale = T::from_f64(1.0 / batch as f64);
    let mut grad = p.clone();
    for (i, &label) in labels.iter().enumerate() {
        let row = &p[i * CLASSES..(i + 1) * CLASSES];
        let py = row[label as usize].into_f64();
        // f64::max drops NaN operands; keep divergence observable
        loss -= if py.is_finite() {
            py.max(1e-300).ln()
        } else {
            f64::NAN
        };
        let predicted = row[1] > row[0];
        correct += (predicted == (label == 1)) as usize;
        let g = &mut grad[i * CLASSES..(i + 1) * CLASSES];
        g[label as usize] = g[label as usize] - T::one();
        for v in g.iter_mut() {
            *v = *v * scale;
        }
    }
    (loss / batch as f64, grad, correct)
}

/// Train in place; returns per-epoch loss and training accuracy. Shuffling
/// is reseeded per epoch from the configured seed, so runs are repeatable.
pub fn train<T: Real>(
    model: &mut Model<T>,
    data: &TrainData<T>,
    cfg: &TrainConfig,
) -> Result<Vec<EpochStats>, TrainError> {
    if data.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let model_dim = model.input_shape.len();
    if data.dim != model_dim {
        return Err(TrainError::ShapeMismatch {
            data_dim: data.dim,
            model_dim,
        });
    }
    let n = data.len();
    let mut adam = Adam::new(model);
    let mut stats = Vec::with_capacity(cfg.epochs);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut xbuf: Vec<T> = Vec::new();
    let mut ybuf: Vec<u8> = Vec::new();
    for epoch in 0..cfg.epochs {
        let mut rng = seed::rng(seed::derive(cfg.seed, &[0x5f5f, epoch as u64]));
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0f64;
        let mut epoch_correct = 0usize;
        for (bi, batch_idx) in indices.chunks(cfg.batch_size.max(1)).enumerate() {
            let bs = batch_idx.len();
            xbuf.clear();
            ybuf.clear();
            for &i in batch_idx {
                xbuf.extend_from_slice(data.row(i));
                ybuf.push(data.y[i]);
            }
            let logits = model.forward_logits(&xbuf, bs);
            let (loss, dlogits, correct) = softmax_xent_batch(&logits, &ybuf);
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch: bi });
            }
            model.backward_from_logits(&dlogits, bs);
            adam.step(model, cfg);
            epoch_loss += loss * bs as f64;
            epoch_correct += correct;
        }
        stats.push(EpochStats {
            loss: epoch_loss / n as f64,
            accuracy: epoch_correct as f64 / n as f64,
        });
    }
    model.meta.train_seed = cfg.seed;
    model.meta.epochs_trained += cfg.epochs;
    model.meta.loss_curve.extend(stats.iter().map(|s| s.loss));
    model
        .meta
        .accuracy_curve
        .extend(stats.iter().map(|s| s.accuracy));
    Ok(stats)
}

/// Fraction of rows predicted correctly, as a percentage.
pub fn accuracy_percent<T: Real>(model: &Model<T>, data: &TrainData<T>) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let mut correct = 0usize;
    for i in 0..data.len() {
        let (bit, _) = model.predict(data.row(i));
        correct += (bit == (data.y[i] == 1)) as usize;
    }
    100.0 * correct as f64 / data.len() as f64
}
