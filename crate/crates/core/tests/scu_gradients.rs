mod common;

use common::{check_gradients, filtered_epochs};
use ssvep_nav::scu::{NormStats, PassMode, ScuHyperparams, ScuModel};
use ssvep_nav::signal::SsvepGenParams;

fn small_model(seed: u64) -> ScuModel<f64> {
    ScuModel::new(ScuHyperparams { n_filters: 4, ..Default::default() }.with_seed(seed)).unwrap()
}

fn batch_epochs() -> Vec<ssvep_nav::EegEpoch64> {
    filtered_epochs(&SsvepGenParams::default().with_snr(2.0).with_seed(21), 4, 0)
}

#[test]
fn frozen_statistics_match_finite_differences() {
    let mut m = small_model(3);
    // Non-trivial running statistics and affine parameters.
    for (i, v) in m.bn_running_var.iter_mut().enumerate() {
        *v = 0.5 + i as f64;
    }
    m.bn_running_mean[1] = 0.2;
    m.bn_gamma[2] = 1.7;
    m.bn_beta[3] = -0.3;
    let epochs = batch_epochs();
    let batch: Vec<_> = epochs.iter().map(|e| (e, e.label.unwrap())).collect();
    let r = check_gradients(&m, &batch, &PassMode::inference(), 1e-4, 0.0);
    assert!(r.max_rel_error < 1e-4, "max rel {:e} at {:?}", r.max_rel_error, r.worst);
    assert!(r.skipped_kinks * 10 < r.checked);
}

#[test]
fn batch_statistics_match_finite_differences() {
    let m = small_model(8);
    let epochs = batch_epochs();
    let batch: Vec<_> = epochs.iter().map(|e| (e, e.label.unwrap())).collect();
    let mode = PassMode { norm: NormStats::Batch, dropout_seed: None };
    // Conv bias is cancelled by the batch mean, so its gradient is zero up to
    // rounding; the floor keeps one-ulp loss differences from counting as
    // relative error.
    let r = check_gradients(&m, &batch, &mode, 1e-4, 1e-6);
    assert!(r.max_rel_error < 1e-4, "max rel {:e} at {:?}", r.max_rel_error, r.worst);
    assert!(r.skipped_kinks * 10 < r.checked);
}

#[test]
fn fixed_dropout_mask_matches_finite_differences() {
    let m = small_model(5);
    let epochs = batch_epochs();
    let batch: Vec<_> = epochs.iter().map(|e| (e, e.label.unwrap())).collect();
    let mode = PassMode { norm: NormStats::Running, dropout_seed: Some(17) };
    let r = check_gradients(&m, &batch, &mode, 1e-4, 0.0);
    assert!(r.max_rel_error < 1e-4, "max rel {:e} at {:?}", r.max_rel_error, r.worst);
}
