//! Adam training, prediction and the training report.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{ParamTensor, PassMode, ScuGradients, ScuModel};
use super::ScuHyperparams;
use crate::error::ModelError;
use crate::num::Scalar;
use crate::signal::{derive_seed, EegEpoch, SsvepDataset, StimulusClass, N_CLASSES};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Per-tensor first and second moment estimates.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    lr: f64,
    step: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(model: &ScuModel<T>) -> Self {
        let zeros = || {
            ParamTensor::ALL
                .iter()
                .map(|t| vec![T::zero(); model.param(*t).len()])
                .collect()
        };
        Self {
            lr: model.hyperparams.learning_rate,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn step(&mut self, model: &mut ScuModel<T>, grads: &ScuGradients<T>) {
        self.step += 1;
        let (b1, b2) = (T::lit(ADAM_BETA1), T::lit(ADAM_BETA2));
        let c1 = T::lit(1.0 - ADAM_BETA1.powi(self.step));
        let c2 = T::lit(1.0 - ADAM_BETA2.powi(self.step));
        let (lr, eps) = (T::lit(self.lr), T::lit(ADAM_EPS));
        for (i, t) in ParamTensor::ALL.into_iter().enumerate() {
            let g = grads.get(t);
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            for (j, w) in model.param_mut(t).iter_mut().enumerate() {
                m[j] = b1 * m[j] + (T::one() - b1) * g[j];
                v[j] = b2 * v[j] + (T::one() - b2) * g[j] * g[j];
                let m_hat = m[j] / c1;
                let v_hat = v[j] / c2;
                *w = *w - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    /// Mean mini-batch loss over the epoch.
    pub loss: f64,
    /// Accuracy of the training-mode passes seen during the epoch.
    pub train_accuracy: f64,
    pub val_accuracy: Option<f64>,
    pub wall: Duration,
}

#[derive(Clone, Debug)]
pub struct TrainReport<T> {
    pub epochs: Vec<EpochStats>,
    /// Inference-mode accuracy of the final model on the training set.
    pub final_train_accuracy: f64,
    pub model: ScuModel<T>,
}

/// Argmax with ties going to the lowest class index.
pub fn class_from_probabilities<T: Scalar>(probs: &[T; N_CLASSES]) -> StimulusClass {
    let mut best = 0;
    for i in 1..N_CLASSES {
        if probs[i] > probs[best] {
            best = i;
        }
    }
    StimulusClass::ALL[best]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction<T> {
    pub class: StimulusClass,
    pub probabilities: [T; N_CLASSES],
    pub latency: Duration,
}

impl<T: Scalar> ScuModel<T> {
    /// Inference-mode decode of one epoch, timed.
    pub fn predict(&self, epoch: &EegEpoch<T>) -> Result<Prediction<T>, ModelError> {
        if !self.trained {
            return Err(ModelError::Untrained);
        }
        let start = Instant::now();
        let probabilities = self.forward(epoch, true)?;
        let class = class_from_probabilities(&probabilities);
        Ok(Prediction {
            class,
            probabilities,
            latency: start.elapsed(),
        })
    }

    /// Inference-mode accuracy over a labeled set.
    pub fn accuracy(&self, dataset: &SsvepDataset<T>) -> Result<f64, ModelError> {
        let labeled = labeled_pairs(dataset)?;
        if labeled.is_empty() {
            return Err(ModelError::Training("empty evaluation set".into()));
        }
        let mode = PassMode::inference();
        let mut correct = 0usize;
        for chunk in labeled.chunks(64) {
            let epochs: Vec<_> = chunk.iter().map(|(e, _)| *e).collect();
            let probs = self.forward_batch(&epochs, &mode)?;
            correct += probs
                .iter()
                .zip(chunk)
                .filter(|(p, (_, y))| class_from_probabilities(p) == *y)
                .count();
        }
        Ok(correct as f64 / labeled.len() as f64)
    }
}

fn labeled_pairs<T: Scalar>(
    dataset: &SsvepDataset<T>,
) -> Result<Vec<(&EegEpoch<T>, StimulusClass)>, ModelError> {
    dataset
        .epochs
        .iter()
        .enumerate()
        .map(|(i, e)| {
            e.label
                .map(|y| (e, y))
                .ok_or_else(|| ModelError::Training(format!("epoch {i} is unlabeled")))
        })
        .collect()
}

/// Trains a fresh model on `dataset`.
pub fn fit<T: Scalar>(dataset: &SsvepDataset<T>, hp: &ScuHyperparams) -> Result<TrainReport<T>, ModelError> {
    fit_with_validation(dataset, None, hp)
}

/// Trains a fresh model, reporting held-out accuracy after every epoch when
/// `validation` is given.
pub fn fit_with_validation<T: Scalar>(
    dataset: &SsvepDataset<T>,
    validation: Option<&SsvepDataset<T>>,
    hp: &ScuHyperparams,
) -> Result<TrainReport<T>, ModelError> {
    hp.validate()?;
    let samples = labeled_pairs(dataset)?;
    let counts = dataset.class_counts();
    if let Some(c) = StimulusClass::ALL.iter().find(|c| counts[c.index()] < 2) {
        return Err(ModelError::Training(format!(
            "class {c} has {} samples, at least 2 per class are required",
            counts[c.index()]
        )));
    }

    let mut model = ScuModel::new(hp.clone())?;
    model.training_mode = true;
    let mut adam = Adam::new(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(hp.rng_seed, &[0x7261_696e]));
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut history = Vec::with_capacity(hp.epochs);

    for _ in 0..hp.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let (mut loss_sum, mut n_batches, mut correct) = (0.0, 0usize, 0usize);
        for idx in order.chunks(hp.batch_size) {
            let batch: Vec<_> = idx.iter().map(|&i| samples[i]).collect();
            let mode = PassMode::training(rng.random());
            let step = model.loss_gradients_stats(&batch, &mode)?;
            if !step.loss.is_finite() {
                return Err(ModelError::Training("loss diverged to a non-finite value".into()));
            }
            correct += step
                .probs
                .iter()
                .zip(&batch)
                .filter(|(p, (_, y))| class_from_probabilities(p) == *y)
                .count();
            adam.step(&mut model, &step.grads);
            if let Some(stats) = &step.stats {
                model.update_running_stats(stats);
            }
            loss_sum += step.loss.as_f64();
            n_batches += 1;
        }
        model.trained = true;
        let val_accuracy = validation.map(|v| model.accuracy(v)).transpose()?;
        history.push(EpochStats {
            loss: loss_sum / n_batches as f64,
            train_accuracy: correct as f64 / samples.len() as f64,
            val_accuracy,
            wall: start.elapsed(),
        });
    }

    model.training_mode = false;
    model.trained = true;
    let final_train_accuracy = model.accuracy(dataset)?;
    Ok(TrainReport {
        epochs: history,
        final_train_accuracy,
        model,
    })
}
