mod common;

use common::{filtered_dataset, held_out};
use proptest::prelude::*;
use ssvep_nav::scu::{
    fit, fit_with_validation, load_model, model_to_string, save_model, PassMode, ScuHyperparams, ScuModel,
};
use ssvep_nav::signal::{EegEpoch, SsvepDataset, SsvepGenParams, StimulusClass, N_CHANNELS, N_SAMPLES};

fn subject(snr: f64, seed: u64) -> SsvepGenParams {
    SsvepGenParams::default().with_snr(snr).with_seed(seed)
}

#[test]
fn high_snr_training_separates_classes() {
    let params = subject(4.0, 31);
    let data = filtered_dataset(&params, 40);
    assert_eq!(data.len(), 120);
    let report = fit(&data, &ScuHyperparams::default().with_seed(1)).unwrap();
    assert!(report.final_train_accuracy >= 0.95, "{}", report.final_train_accuracy);
    assert_eq!(report.epochs.len(), 50);
    for e in &report.epochs {
        assert!(e.loss.is_finite());
        assert!((0.0..=1.0).contains(&e.train_accuracy));
        assert!(e.val_accuracy.is_none());
    }

    let fresh = held_out(&params, &[StimulusClass::F15; 100], 10_000);
    let hits = fresh
        .iter()
        .filter(|e| report.model.predict(e).unwrap().class == StimulusClass::F15)
        .count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn chance_level_validation_without_signal() {
    let mut accs = Vec::new();
    for run in 0..20u64 {
        let params = subject(0.0, 100 + run);
        let train = filtered_dataset(&params, 40);
        let val_epochs = held_out(&params, &StimulusClass::ALL.repeat(10), 5_000);
        let val = SsvepDataset::new(val_epochs, train.metadata.clone());
        let r = fit_with_validation(&train, Some(&val), &ScuHyperparams::default().with_seed(run)).unwrap();
        accs.push(r.epochs.last().unwrap().val_accuracy.unwrap());
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    assert!((mean - 1.0 / 3.0).abs() <= 0.10, "mean {mean}, runs {accs:?}");
}

#[test]
fn seeded_training_is_bit_reproducible() {
    let data = filtered_dataset(&subject(2.0, 4), 6);
    let hp = ScuHyperparams { epochs: 5, ..Default::default() }.with_seed(9);
    let a = fit(&data, &hp).unwrap().model;
    let b = fit(&data, &hp).unwrap().model;
    assert_eq!(a, b);
    assert_eq!(model_to_string(&a), model_to_string(&b));
    let c = fit(&data, &hp.clone().with_seed(10)).unwrap().model;
    assert_ne!(a.conv_weights, c.conv_weights);
}

#[test]
fn saved_model_predicts_identically() {
    let params = subject(1.5, 77);
    let data = filtered_dataset(&params, 8);
    let hp = ScuHyperparams { epochs: 8, batch_size: 8, ..Default::default() }.with_seed(2);
    let model = fit(&data, &hp).unwrap().model;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.scu");
    save_model(&model, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("SCU v1\n"));
    let loaded: ScuModel<f32> = load_model(&path).unwrap();
    assert_eq!(loaded.hyperparams, hp);
    assert_eq!(loaded, model);
    for e in held_out(&params, &StimulusClass::ALL.repeat(10), 900) {
        let (a, b) = (model.predict(&e).unwrap(), loaded.predict(&e).unwrap());
        assert_eq!(a.class, b.class);
        assert_eq!(a.probabilities, b.probabilities);
    }
}

#[test]
fn inverted_dropout_preserves_expected_activation() {
    let model = ScuModel::<f64>::new(ScuHyperparams::default().with_seed(12)).unwrap();
    let epoch = common::filtered_epochs(&subject(2.0, 3), 1, 0).remove(0);
    let plain = PassMode::inference();
    let reference = model.features(&[&epoch], &plain).unwrap().remove(0);
    assert_eq!(reference, model.features(&[&epoch], &plain).unwrap()[0]);

    let draws = 10_000u64;
    let mut mean = vec![0.0; reference.len()];
    for seed in 0..draws {
        let mode = PassMode { dropout_seed: Some(seed), ..plain };
        let f = model.features(&[&epoch], &mode).unwrap().remove(0);
        for (m, v) in mean.iter_mut().zip(&f) {
            *m += v / draws as f64;
        }
    }
    let total: f64 = reference.iter().sum();
    let total_mean: f64 = mean.iter().sum();
    assert!(((total_mean - total) / total).abs() < 0.02, "{total_mean} vs {total}");
    // Per feature the standard error is 1% of the value at p = 0.5.
    for (m, r) in mean.iter().zip(&reference) {
        assert!((m - r).abs() <= 0.05 * r.abs() + 1e-12, "{m} vs {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn softmax_is_normalized(seed in any::<u64>(), scale in 1e-3f32..1e3, offset in -50f32..50.0) {
        let model = ScuModel::<f32>::new(ScuHyperparams { n_filters: 4, ..Default::default() }.with_seed(seed)).unwrap();
        let samples: Vec<f32> = (0..N_CHANNELS * N_SAMPLES)
            .map(|i| offset + scale * ((i as f32 * 0.37 + seed as f32).sin()))
            .collect();
        let epoch = EegEpoch::new(samples, None).unwrap();
        for inference in [true, false] {
            let p = model.forward(&epoch, inference).unwrap();
            prop_assert!((p.iter().sum::<f32>() - 1.0).abs() <= 1e-6);
            prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
