//! Stratified k-fold cross-validation.

use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::train::{class_from_probabilities, fit};
use super::ScuHyperparams;
use crate::error::ModelError;
use crate::metrics::{mean_std, ConfusionMatrix};
use crate::num::Scalar;
use crate::signal::{derive_seed, SsvepDataset, StimulusClass};

/// Folds per subject in offline evaluation.
pub const DEFAULT_FOLDS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Held-out predictions pooled over all folds.
    pub confusion: ConfusionMatrix,
    pub mean_decode_latency_s: f64,
}

/// Test-set indices per fold. Each class is shuffled under `seed` and dealt
/// round-robin, continuing the deal across classes so fold sizes differ by
/// at most one.
pub fn stratified_folds(labels: &[StimulusClass], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, ModelError> {
    if k < 2 {
        return Err(ModelError::Parameter(format!("k must be >= 2, got {k}")));
    }
    if k > labels.len() {
        return Err(ModelError::Parameter(format!(
            "k = {k} exceeds dataset size {}",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x666f_6c64]));
    let mut folds = vec![Vec::new(); k];
    let mut deal = 0usize;
    for class in StimulusClass::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[deal % k].push(i);
            deal += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Trains a fresh model per fold and scores it on the held-out fold.
pub fn cross_validate<T: Scalar>(
    dataset: &SsvepDataset<T>,
    hp: &ScuHyperparams,
    k: usize,
) -> Result<CvReport, ModelError> {
    let labels: Vec<StimulusClass> = dataset
        .epochs
        .iter()
        .enumerate()
        .map(|(i, e)| e.label.ok_or_else(|| ModelError::Training(format!("epoch {i} is unlabeled"))))
        .collect::<Result<_, _>>()?;
    let folds = stratified_folds(&labels, k, hp.rng_seed)?;

    let mut fold_accuracies = Vec::with_capacity(k);
    let mut confusion = ConfusionMatrix::default();
    let mut latency = Duration::ZERO;
    for (fi, test_idx) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = (0..dataset.len()).filter(|i| test_idx.binary_search(i).is_err()).collect();
        let fold_hp = hp.clone().with_seed(derive_seed(hp.rng_seed, &[fi as u64]));
        let model = fit(&dataset.subset(&train_idx), &fold_hp)?.model;
        let mut correct = 0usize;
        for &i in test_idx {
            let p = model.predict(&dataset.epochs[i])?;
            latency += p.latency;
            debug_assert_eq!(p.class, class_from_probabilities(&p.probabilities));
            confusion.record(labels[i], p.class);
            correct += (p.class == labels[i]) as usize;
        }
        fold_accuracies.push(correct as f64 / test_idx.len() as f64);
    }
    let (mean, std) = mean_std(&fold_accuracies);
    Ok(CvReport {
        fold_accuracies,
        mean,
        std,
        confusion,
        mean_decode_latency_s: latency.as_secs_f64() / dataset.len() as f64,
    })
}
