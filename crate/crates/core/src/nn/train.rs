//! Minibatch training with the Adam update rule.

use rand::Rng;

use super::buffer::{ReplayBuffer, TrainingExample};
use super::network::{Batch, Dropout, Network, Prediction, Scalar, LOG_FLOOR};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 64,
            learning_rate: 0.005,
            dropout: 0.3,
        }
    }
}

/// `(v - z)^2 - sum_a pi(a) log p(a)`, with `p` floored at 1e-12 inside the log.
pub fn loss(pred: &Prediction, target: &TrainingExample) -> f64 {
    let z = target.z as f64;
    let mse = (pred.value - z).powi(2);
    let ce: f64 = pred
        .policy
        .iter()
        .zip(&target.pi)
        .map(|(&p, &pi)| -(pi as f64) * p.max(LOG_FLOOR).ln())
        .sum();
    mse + ce
}

pub fn make_batch<T: Scalar>(examples: &[&TrainingExample]) -> Batch<T> {
    let mut batch = Batch {
        len: examples.len(),
        inputs: Vec::new(),
        pis: Vec::new(),
        zs: Vec::with_capacity(examples.len()),
    };
    for ex in examples {
        batch.inputs.extend(ex.encoding.plane.iter().map(|&v| T::of(v as f64)));
        batch.pis.extend(ex.pi.iter().map(|&p| T::of(p as f64)));
        batch.zs.push(T::of(ex.z as f64));
    }
    batch
}

/// Adam with the usual 0.9 / 0.999 / 1e-8 constants.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    lr: f64,
    step: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    pub const BETA1: f64 = 0.9;
    pub const BETA2: f64 = 0.999;
    pub const EPSILON: f64 = 1e-8;

    pub fn new(net: &Network<T>, lr: f64) -> Self {
        let zeros: Vec<Vec<T>> = net.params().iter().map(|t| vec![T::zero(); t.len()]).collect();
        Adam {
            lr,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn apply(&mut self, net: &mut Network<T>, grads: &[Vec<T>]) {
        self.step += 1;
        let b1 = T::of(Self::BETA1);
        let b2 = T::of(Self::BETA2);
        let one = T::one();
        let c1 = T::of(1.0 - Self::BETA1.powi(self.step));
        let c2 = T::of(1.0 - Self::BETA2.powi(self.step));
        let lr = T::of(self.lr);
        let eps = T::of(Self::EPSILON);
        for (((w, g), m), v) in net.params_mut().iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..w.len() {
                m[i] = b1 * m[i] + (one - b1) * g[i];
                v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                w[i] = w[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T: Scalar> {
    pub model: Network<T>,
    /// Mean minibatch loss of every epoch, dropout active.
    pub epoch_losses: Vec<f64>,
}

/// Trains a copy of `model` on everything in `buffer`.
pub fn train<T: Scalar, R: Rng + ?Sized>(
    model: &Network<T>,
    buffer: &ReplayBuffer,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<TrainOutcome<T>> {
    if buffer.is_empty() {
        return Err(Error::Training("replay buffer is empty".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Training("batch size must be >= 1".into()));
    }
    let mut net = model.clone();
    let mut adam = Adam::new(&net, cfg.learning_rate);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let order = buffer.sample(rng);
        let mut total = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch = make_batch::<T>(chunk);
            let dropout = (cfg.dropout > 0.0).then(|| Dropout {
                rate: cfg.dropout,
                seed: rng.gen(),
            });
            let (l, grads) = net.loss_and_grad(&batch, dropout);
            if !l.is_finite() {
                return Err(Error::Training(format!("loss diverged to {l}")));
            }
            adam.apply(&mut net, &grads);
            total += l;
            batches += 1;
        }
        epoch_losses.push(total / batches as f64);
    }
    Ok(TrainOutcome {
        model: net,
        epoch_losses,
    })
}
