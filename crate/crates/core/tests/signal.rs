mod common;

use std::f64::consts::PI;

use common::dft_magnitude;
use proptest::prelude::*;
use ssvep_nav::error::SignalError;
use ssvep_nav::signal::{
    apply_filter, design_bandpass, generate_dataset, generate_epoch, load_dataset, save_dataset, ChannelId,
    EegEpoch, SsvepGenParams, StimulusClass, N_CHANNELS, N_SAMPLES,
};

const TRANSIENT: usize = 250;
/// Samples per Hz of DFT resolution: 1500 samples at 500 Hz.
const BINS_PER_HZ: usize = 3;

fn occipital() -> [usize; 2] {
    [ChannelId::O1.index(), ChannelId::O2.index()]
}

/// DFT bin with the largest summed magnitude over `channels`, DC excluded.
fn peak_bin(epoch: &EegEpoch<f64>, channels: &[usize], max_bin: usize) -> usize {
    (1..=max_bin)
        .max_by(|&a, &b| {
            let m = |k| channels.iter().map(|&c| dft_magnitude(epoch.channel(c), k)).sum::<f64>();
            m(a).total_cmp(&m(b))
        })
        .unwrap()
}

#[test]
fn same_inputs_same_epoch() {
    let p = SsvepGenParams::default().with_seed(7);
    let a: EegEpoch<f64> = generate_epoch(StimulusClass::F10, &p, 0).unwrap();
    let b: EegEpoch<f64> = generate_epoch(StimulusClass::F10, &p, 0).unwrap();
    assert_eq!(a, b);
    let c: EegEpoch<f64> = generate_epoch(StimulusClass::F10, &p, 1).unwrap();
    assert_ne!(a, c);
    assert_eq!(a.n_channels(), N_CHANNELS);
    assert_eq!(a.n_samples(), N_SAMPLES);
    assert_eq!(a.label, Some(StimulusClass::F10));
}

#[test]
fn twelve_hz_epoch_peaks_at_twelve_hz_on_o1() {
    let p = SsvepGenParams::default().with_snr(4.0).with_noise_mix(0.0).with_seed(3);
    let e: EegEpoch<f64> = generate_epoch(StimulusClass::F12, &p, 0).unwrap();
    let k = peak_bin(&e, &[ChannelId::O1.index()], N_SAMPLES / 2);
    assert!(k.abs_diff(12 * BINS_PER_HZ) <= 1, "peak at bin {k}");
}

#[test]
fn occipital_peak_matches_class_for_every_seed() {
    for snr in [2.0, 4.0] {
        for trial in 0..100u64 {
            let class = StimulusClass::ALL[trial as usize % 3];
            let p = SsvepGenParams::default()
                .with_snr(snr)
                .with_noise_mix(0.0)
                .with_seed(1000 + trial);
            let e: EegEpoch<f64> = generate_epoch(class, &p, trial).unwrap();
            let k = peak_bin(&e, &occipital(), 250 * BINS_PER_HZ / 5);
            assert_eq!(k, class.frequency_hz() as usize * BINS_PER_HZ, "snr {snr} trial {trial}");
        }
    }
}

#[test]
fn zero_snr_has_no_line_at_stimulus_frequency() {
    let p = SsvepGenParams::default().with_snr(0.0).with_seed(11);
    let target = 15 * BINS_PER_HZ;
    let neighbours: Vec<usize> = (target - 3..=target + 3).filter(|k| *k != target).collect();
    let mut at = [0.0; N_CHANNELS];
    let mut around = [0.0; N_CHANNELS];
    for trial in 0..100 {
        let e: EegEpoch<f64> = generate_epoch(StimulusClass::F15, &p, trial).unwrap();
        for ch in 0..N_CHANNELS {
            let x = e.channel(ch);
            at[ch] += dft_magnitude(x, target).powi(2);
            around[ch] += neighbours.iter().map(|k| dft_magnitude(x, *k).powi(2)).sum::<f64>() / neighbours.len() as f64;
        }
    }
    for ch in 0..N_CHANNELS {
        let ratio = at[ch] / around[ch];
        assert!((0.6..1.5).contains(&ratio), "channel {ch} ratio {ratio}");
    }
    let pooled = at.iter().sum::<f64>() / around.iter().sum::<f64>();
    assert!((0.85..1.15).contains(&pooled), "pooled ratio {pooled}");
}

#[test]
fn dataset_sizes_order_and_validation() {
    let p = SsvepGenParams::default().with_seed(2);
    let d = generate_dataset::<f32>(&p, 40).unwrap();
    assert_eq!(d.len(), 120);
    assert_eq!(d.class_counts(), [40, 40, 40]);
    for (i, e) in d.epochs.iter().enumerate() {
        assert_eq!(e.label, Some(StimulusClass::ALL[i % 3]));
    }
    assert_eq!(generate_dataset::<f32>(&p, 40).unwrap().epochs, d.epochs);
    assert_eq!(generate_dataset::<f32>(&p, 1).unwrap().len(), 3);
    assert!(matches!(generate_dataset::<f32>(&p, 0), Err(SignalError::Parameter(_))));
    assert!(matches!(
        generate_epoch::<f32>(StimulusClass::F10, &p.clone().with_snr(-1.0), 0),
        Err(SignalError::Parameter(_))
    ));
    let mut no_harmonics = p.clone();
    no_harmonics.n_harmonics = 0;
    assert!(generate_epoch::<f32>(StimulusClass::F10, &no_harmonics, 0).is_err());
}

#[test]
fn dataset_file_round_trip_and_bad_magic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.ssvep");
    let d = generate_dataset::<f32>(&SsvepGenParams::default().with_seed(5), 40).unwrap();
    save_dataset(&d, &path).unwrap();
    let back = load_dataset::<f32>(&path).unwrap();
    assert_eq!(back.epochs, d.epochs);

    let mut bytes = std::fs::read(&path).unwrap();
    bytes[..6].copy_from_slice(b"XXXXX1");
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(load_dataset::<f32>(&path), Err(SignalError::Format { offset: 0, .. })));
}

fn sinusoid(freq_hz: f64) -> EegEpoch<f64> {
    let one: Vec<f64> = (0..N_SAMPLES).map(|n| (2.0 * PI * freq_hz * n as f64 / 500.0).sin()).collect();
    EegEpoch::new(one.repeat(N_CHANNELS), None).unwrap()
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Steady-state amplitude ratio of a filtered sinusoid.
fn measured_gain(freq_hz: f64) -> f64 {
    let spec = design_bandpass::<f64>(9.0, 100.0, 500.0).unwrap();
    let x = sinusoid(freq_hz);
    let y = apply_filter(&spec, &x).unwrap();
    let mut worst: f64 = 0.0;
    for ch in 0..N_CHANNELS {
        let g = rms(&y.channel(ch)[TRANSIENT..]) / rms(&x.channel(ch)[TRANSIENT..]);
        worst = if ch == 0 { g } else { worst.max(g) };
    }
    worst
}

#[test]
fn filter_passband_and_stopbands() {
    let g30 = measured_gain(30.0);
    assert!((0.89..=1.12).contains(&g30), "30 Hz gain {g30}");
    let g50 = measured_gain(50.0);
    assert!((0.89..=1.12).contains(&g50), "50 Hz gain {g50}");
    assert!(measured_gain(2.0) < 0.1, "2 Hz gain {}", measured_gain(2.0));
    assert!(measured_gain(200.0) < 0.1, "200 Hz gain {}", measured_gain(200.0));
}

#[test]
fn filter_keeps_zero_shape_and_label() {
    let spec = design_bandpass::<f32>(9.0, 100.0, 500.0).unwrap();
    let z = EegEpoch::<f32>::zeros(Some(StimulusClass::F12));
    assert_eq!(apply_filter(&spec, &z).unwrap(), z);
    assert!(matches!(design_bandpass::<f64>(9.0, 260.0, 500.0), Err(SignalError::Parameter(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn filter_is_linear(seed_a in 0u64..1000, seed_b in 0u64..1000, scale in -3.0f64..3.0) {
        let spec = design_bandpass::<f64>(9.0, 100.0, 500.0).unwrap();
        let p = SsvepGenParams::default();
        let a: EegEpoch<f64> = generate_epoch(StimulusClass::F10, &p.clone().with_seed(seed_a), 0).unwrap();
        let b: EegEpoch<f64> = generate_epoch(StimulusClass::F15, &p.with_seed(seed_b), 1).unwrap();
        let sum: Vec<f64> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x + scale * y).collect();
        let fs = apply_filter(&spec, &EegEpoch::new(sum, None).unwrap()).unwrap();
        let fa = apply_filter(&spec, &a).unwrap();
        let fb = apply_filter(&spec, &b).unwrap();
        let norm = fs.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for ((s, x), y) in fs.as_slice().iter().zip(fa.as_slice()).zip(fb.as_slice()) {
            prop_assert!((s - (x + scale * y)).abs() <= 1e-9 * norm);
        }
    }

    #[test]
    fn generator_is_pure(seed in any::<u64>(), trial in any::<u64>(), class in 0usize..3) {
        let p = SsvepGenParams::default().with_seed(seed);
        let c = StimulusClass::ALL[class];
        let a: EegEpoch<f32> = generate_epoch(c, &p, trial).unwrap();
        let b: EegEpoch<f32> = generate_epoch(c, &p, trial).unwrap();
        prop_assert_eq!(a, b);
    }
}
