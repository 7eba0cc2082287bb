//! Seeded synthetic SSVEP epochs.
//!
//! Each channel carries `snr · gain · Σ_k decay^(k-1) · sin(2π·k·f·t + φ_k)`
//! on top of unit-power noise. Noise is a blend of white and 1/f noise; the
//! harmonic phases are shared by all channels so the response looks like a
//! single occipital source seen through a fixed scalp topography.
//!
//! The response is phase-locked to stimulus onset: each class has a base phase
//! per harmonic fixed by the seed, and each trial adds a small latency jitter
//! that shifts harmonic `k` by `k·δ`, `δ ~ N(0, phase_jitter_rad²)`.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::dataset::{DatasetMetadata, DatasetSource, SsvepDataset};
use super::{ChannelId, EegEpoch, ScalpRegion, StimulusClass, N_CHANNELS, N_SAMPLES, SAMPLE_RATE_HZ};
use crate::error::SignalError;
use crate::num::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsvepGenParams {
    /// Amplitude of the SSVEP fundamental relative to unit-power noise.
    pub snr: f64,
    pub n_harmonics: u32,
    /// Amplitude multiplier applied per harmonic step.
    pub harmonic_decay: f64,
    /// Per-channel scalar in `ChannelId` order.
    pub channel_gain: [f64; N_CHANNELS],
    /// Fraction of noise power that is 1/f rather than white.
    pub noise_mix: f64,
    /// Standard deviation of the per-trial onset jitter, as fundamental phase.
    #[serde(default = "default_phase_jitter")]
    pub phase_jitter_rad: f64,
    pub rng_seed: u64,
}

fn default_phase_jitter() -> f64 {
    0.3
}

impl Default for SsvepGenParams {
    fn default() -> Self {
        let channel_gain = ChannelId::ALL.map(|ch| match ch.region() {
            ScalpRegion::Occipital => 1.0,
            ScalpRegion::Parietal => 0.6,
            ScalpRegion::Frontal => 0.2,
            ScalpRegion::Reference => 0.05,
        });
        Self {
            snr: 1.0,
            n_harmonics: 3,
            harmonic_decay: 0.5,
            channel_gain,
            noise_mix: 0.7,
            phase_jitter_rad: default_phase_jitter(),
            rng_seed: 0,
        }
    }
}

impl SsvepGenParams {
    pub fn with_snr(mut self, snr: f64) -> Self {
        self.snr = snr;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_noise_mix(mut self, noise_mix: f64) -> Self {
        self.noise_mix = noise_mix;
        self
    }

    pub fn with_phase_jitter(mut self, phase_jitter_rad: f64) -> Self {
        self.phase_jitter_rad = phase_jitter_rad;
        self
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        let bad = |m: String| Err(SignalError::Parameter(m));
        if !(self.phase_jitter_rad.is_finite() && self.phase_jitter_rad >= 0.0) {
            return bad(format!("phase_jitter_rad must be finite and >= 0, got {}", self.phase_jitter_rad));
        }
        if !(self.snr.is_finite() && self.snr >= 0.0) {
            return bad(format!("snr must be finite and >= 0, got {}", self.snr));
        }
        if self.n_harmonics < 1 {
            return bad("n_harmonics must be >= 1".into());
        }
        if !(self.harmonic_decay > 0.0 && self.harmonic_decay <= 1.0) {
            return bad(format!("harmonic_decay must lie in (0, 1], got {}", self.harmonic_decay));
        }
        if !(0.0..=1.0).contains(&self.noise_mix) {
            return bad(format!("noise_mix must lie in [0, 1], got {}", self.noise_mix));
        }
        if self.channel_gain.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("channel gains must be finite and >= 0".into());
        }
        let region_gains = |r: ScalpRegion| {
            ChannelId::ALL
                .iter()
                .filter(move |c| c.region() == r)
                .map(|c| self.channel_gain[c.index()])
        };
        let min_occ = region_gains(ScalpRegion::Occipital).fold(f64::INFINITY, f64::min);
        let max_par = region_gains(ScalpRegion::Parietal).fold(0.0, f64::max);
        let min_par = region_gains(ScalpRegion::Parietal).fold(f64::INFINITY, f64::min);
        let max_front = region_gains(ScalpRegion::Frontal).fold(0.0, f64::max);
        if min_occ < max_par || min_par < max_front {
            return bad("channel gains must satisfy occipital >= parietal >= frontal".into());
        }
        Ok(())
    }
}

/// Stream id for the per-class base phases; trial indices never reach it.
const PHASE_STREAM: u64 = u64::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with stream identifiers into an independent seed.
pub(crate) fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, p| splitmix64(acc ^ splitmix64(*p)))
}

fn fft_pair() -> &'static (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    static PLANS: OnceLock<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)> = OnceLock::new();
    PLANS.get_or_init(|| {
        let mut planner = FftPlanner::new();
        (
            planner.plan_fft_forward(N_SAMPLES),
            planner.plan_fft_inverse(N_SAMPLES),
        )
    })
}

fn normalize_unit_power(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    if rms > 0.0 {
        x.iter_mut().for_each(|v| *v /= rms);
    }
}

fn white(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..N_SAMPLES).map(|_| rng.sample(StandardNormal)).collect()
}

/// 1/f noise by shaping a white spectrum with `1/sqrt(f)` amplitude.
fn pink(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (fwd, inv) = fft_pair();
    let mut buf: Vec<Complex<f64>> = white(rng).into_iter().map(|v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    buf[0] = Complex::new(0.0, 0.0);
    for k in 1..N_SAMPLES {
        let bin = k.min(N_SAMPLES - k) as f64;
        buf[k] /= bin.sqrt();
    }
    inv.process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

fn noise(rng: &mut ChaCha8Rng, noise_mix: f64) -> Vec<f64> {
    let mut w = white(rng);
    let mut p = pink(rng);
    normalize_unit_power(&mut w);
    normalize_unit_power(&mut p);
    let (a, b) = ((1.0 - noise_mix).sqrt(), noise_mix.sqrt());
    let mut out: Vec<f64> = w.iter().zip(&p).map(|(w, p)| a * w + b * p).collect();
    normalize_unit_power(&mut out);
    out
}

/// Generates one synthetic epoch. Output is a pure function of the inputs.
pub fn generate_epoch<T: Scalar>(
    class: StimulusClass,
    params: &SsvepGenParams,
    trial_index: u64,
) -> Result<EegEpoch<T>, SignalError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        params.rng_seed,
        &[class.index() as u64, trial_index],
    ));
    let mut base = ChaCha8Rng::seed_from_u64(derive_seed(params.rng_seed, &[class.index() as u64, PHASE_STREAM]));
    let jitter = params.phase_jitter_rad * rng.sample::<f64, _>(StandardNormal);
    let phases: Vec<f64> = (0..params.n_harmonics)
        .map(|k| base.random::<f64>() * 2.0 * PI + (k + 1) as f64 * jitter)
        .collect();

    let f0 = class.frequency_hz() as f64;
    let fs = SAMPLE_RATE_HZ as f64;
    let source: Vec<f64> = (0..N_SAMPLES)
        .map(|n| {
            let t = n as f64 / fs;
            phases
                .iter()
                .enumerate()
                .map(|(k, phi)| {
                    let harmonic = (k + 1) as f64;
                    params.harmonic_decay.powi(k as i32)
                        * (2.0 * PI * harmonic * f0 * t + phi).sin()
                })
                .sum()
        })
        .collect();

    let mut samples = Vec::with_capacity(N_CHANNELS * N_SAMPLES);
    for ch in 0..N_CHANNELS {
        let gain = params.snr * params.channel_gain[ch];
        let noise = noise(&mut rng, params.noise_mix);
        samples.extend(
            source
                .iter()
                .zip(&noise)
                .map(|(s, n)| T::lit(gain * s + n)),
        );
    }
    EegEpoch::new(samples, Some(class))
}

/// Generates `trials_per_class` labeled epochs per class, interleaved
/// F10, F12, F15, F10, ...
pub fn generate_dataset<T: Scalar>(
    params: &SsvepGenParams,
    trials_per_class: usize,
) -> Result<SsvepDataset<T>, SignalError> {
    params.validate()?;
    if trials_per_class < 1 {
        return Err(SignalError::Parameter("trials_per_class must be >= 1".into()));
    }
    let mut epochs = Vec::with_capacity(trials_per_class * StimulusClass::ALL.len());
    for trial in 0..trials_per_class {
        for class in StimulusClass::ALL {
            epochs.push(generate_epoch(class, params, trial as u64)?);
        }
    }
    Ok(SsvepDataset::new(
        epochs,
        DatasetMetadata::now("synthetic", DatasetSource::Generated(params.clone())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_inputs_give_identical_epochs() {
        let p = SsvepGenParams::default().with_seed(7);
        let a = generate_epoch::<f32>(StimulusClass::F10, &p, 0).unwrap();
        let b = generate_epoch::<f32>(StimulusClass::F10, &p, 0).unwrap();
        assert_eq!(a, b);
        let c = generate_epoch::<f32>(StimulusClass::F10, &p, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn response_is_phase_locked_across_trials() {
        let corr = |a: &[f64], b: &[f64]| {
            let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
            dot(a, b) / (dot(a, a) * dot(b, b)).sqrt()
        };
        let o1 = ChannelId::O1.index();
        let p = SsvepGenParams::default().with_snr(10.0).with_seed(5).with_phase_jitter(0.0);
        let a = generate_epoch::<f64>(StimulusClass::F12, &p, 0).unwrap();
        let b = generate_epoch::<f64>(StimulusClass::F12, &p, 1).unwrap();
        assert!(corr(a.channel(o1), b.channel(o1)) > 0.95);
        let other = generate_epoch::<f64>(StimulusClass::F12, &p.clone().with_seed(6), 1).unwrap();
        assert!(corr(a.channel(o1), other.channel(o1)) < 0.95);
        assert!(p.clone().with_phase_jitter(-1.0).validate().is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        let p = SsvepGenParams::default().with_snr(-1.0);
        assert!(matches!(
            generate_epoch::<f64>(StimulusClass::F12, &p, 0),
            Err(SignalError::Parameter(_))
        ));
        let p = SsvepGenParams {
            n_harmonics: 0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let mut p = SsvepGenParams::default();
        p.channel_gain[ChannelId::Fz.index()] = 2.0;
        assert!(p.validate().is_err());
        assert!(SsvepGenParams::default().with_noise_mix(1.5).validate().is_err());
    }

    #[test]
    fn noise_is_unit_power_per_channel() {
        let p = SsvepGenParams::default().with_snr(0.0).with_seed(3);
        let e = generate_epoch::<f64>(StimulusClass::F15, &p, 0).unwrap();
        for ch in 0..N_CHANNELS {
            let x = e.channel(ch);
            let power = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
            assert!((power - 1.0).abs() < 1e-9, "channel {ch} power {power}");
        }
    }

    #[test]
    fn dataset_sizes_and_interleaving() {
        let p = SsvepGenParams::default().with_seed(1);
        let d = generate_dataset::<f32>(&p, 1).unwrap();
        assert_eq!(d.len(), 3);
        let labels: Vec<_> = d.epochs.iter().map(|e| e.label.unwrap()).collect();
        assert_eq!(labels, StimulusClass::ALL.to_vec());
        assert!(generate_dataset::<f32>(&p, 0).is_err());
    }

    #[test]
    fn derived_seeds_differ_per_stream() {
        assert_ne!(derive_seed(1, &[0, 0]), derive_seed(1, &[0, 1]));
        assert_ne!(derive_seed(1, &[1, 0]), derive_seed(1, &[0, 1]));
        assert_eq!(derive_seed(9, &[2, 3]), derive_seed(9, &[2, 3]));
    }
}
