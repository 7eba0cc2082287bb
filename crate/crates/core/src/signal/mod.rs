//! EEG data model, synthetic SSVEP generation, bandpass preprocessing and
//! dataset persistence.

mod dataset;
mod filter;
mod generator;

pub use dataset::{load_dataset, save_dataset, DatasetMetadata, DatasetSource, SsvepDataset};
pub use filter::{apply_filter, design_bandpass, design_butterworth_bandpass, Biquad, FilterSpec};
pub use generator::{generate_dataset, generate_epoch, SsvepGenParams};
pub(crate) use generator::derive_seed;

use serde::{Deserialize, Serialize};

use crate::error::SignalError;
use crate::num::Scalar;

pub const N_CHANNELS: usize = 9;
pub const SAMPLE_RATE_HZ: u32 = 500;
pub const EPOCH_SECONDS: u32 = 3;
pub const N_SAMPLES: usize = (SAMPLE_RATE_HZ * EPOCH_SECONDS) as usize;
pub const N_CLASSES: usize = 3;

/// Calibration trials recorded per class.
pub const DEFAULT_TRIALS_PER_CLASS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hemisphere {
    Left,
    Right,
    Midline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalpRegion {
    Parietal,
    Occipital,
    Frontal,
    Reference,
}

/// The nine streamed sensors, in storage order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelId {
    P7,
    P3,
    Pz,
    P4,
    P8,
    O1,
    O2,
    Fz,
    A2Ref,
}

impl ChannelId {
    pub const ALL: [ChannelId; N_CHANNELS] = [
        ChannelId::P7,
        ChannelId::P3,
        ChannelId::Pz,
        ChannelId::P4,
        ChannelId::P8,
        ChannelId::O1,
        ChannelId::O2,
        ChannelId::Fz,
        ChannelId::A2Ref,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelId::P7 => "P7",
            ChannelId::P3 => "P3",
            ChannelId::Pz => "Pz",
            ChannelId::P4 => "P4",
            ChannelId::P8 => "P8",
            ChannelId::O1 => "O1",
            ChannelId::O2 => "O2",
            ChannelId::Fz => "Fz",
            ChannelId::A2Ref => "A2ref",
        }
    }

    /// Odd-numbered sites sit over the left hemisphere, even over the right.
    pub fn hemisphere(self) -> Hemisphere {
        match self {
            ChannelId::P7 | ChannelId::P3 | ChannelId::O1 => Hemisphere::Left,
            ChannelId::P4 | ChannelId::P8 | ChannelId::O2 | ChannelId::A2Ref => Hemisphere::Right,
            ChannelId::Pz | ChannelId::Fz => Hemisphere::Midline,
        }
    }

    pub fn region(self) -> ScalpRegion {
        match self {
            ChannelId::P7 | ChannelId::P3 | ChannelId::Pz | ChannelId::P4 | ChannelId::P8 => {
                ScalpRegion::Parietal
            }
            ChannelId::O1 | ChannelId::O2 => ScalpRegion::Occipital,
            ChannelId::Fz => ScalpRegion::Frontal,
            ChannelId::A2Ref => ScalpRegion::Reference,
        }
    }
}

/// Flicker frequency class. Class index and frequency are a fixed bijection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StimulusClass {
    F10,
    F12,
    F15,
}

impl StimulusClass {
    pub const ALL: [StimulusClass; N_CLASSES] =
        [StimulusClass::F10, StimulusClass::F12, StimulusClass::F15];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn frequency_hz(self) -> u32 {
        match self {
            StimulusClass::F10 => 10,
            StimulusClass::F12 => 12,
            StimulusClass::F15 => 15,
        }
    }

    pub fn from_frequency_hz(hz: f64) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| (c.frequency_hz() as f64 - hz).abs() < 1e-9)
    }
}

impl std::fmt::Display for StimulusClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} Hz", self.frequency_hz())
    }
}

/// One 9-channel × 1500-sample trial at 500 Hz, stored channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EegEpoch<T> {
    samples: Vec<T>,
    sample_rate_hz: u32,
    pub label: Option<StimulusClass>,
}

impl<T: Scalar> EegEpoch<T> {
    /// Builds an epoch from channel-major samples, checking shape and finiteness.
    pub fn new(samples: Vec<T>, label: Option<StimulusClass>) -> Result<Self, SignalError> {
        if samples.len() != N_CHANNELS * N_SAMPLES {
            return Err(SignalError::Data(format!(
                "expected {} samples ({N_CHANNELS} × {N_SAMPLES}), got {}",
                N_CHANNELS * N_SAMPLES,
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::Data(format!(
                "non-finite value at channel {}, sample {}",
                i / N_SAMPLES,
                i % N_SAMPLES
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz: SAMPLE_RATE_HZ,
            label,
        })
    }

    pub fn zeros(label: Option<StimulusClass>) -> Self {
        Self {
            samples: vec![T::zero(); N_CHANNELS * N_SAMPLES],
            sample_rate_hz: SAMPLE_RATE_HZ,
            label,
        }
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn n_channels(&self) -> usize {
        N_CHANNELS
    }

    pub fn n_samples(&self) -> usize {
        N_SAMPLES
    }

    pub fn channel(&self, ch: usize) -> &[T] {
        &self.samples[ch * N_SAMPLES..(ch + 1) * N_SAMPLES]
    }

    pub(crate) fn channel_mut(&mut self, ch: usize) -> &mut [T] {
        &mut self.samples[ch * N_SAMPLES..(ch + 1) * N_SAMPLES]
    }

    /// All samples, channel-major.
    pub fn as_slice(&self) -> &[T] {
        &self.samples
    }

    /// Converts to another precision.
    pub fn cast<U: Scalar>(&self) -> EegEpoch<U> {
        EegEpoch {
            samples: self.samples.iter().map(|v| U::lit(v.as_f64())).collect(),
            sample_rate_hz: self.sample_rate_hz,
            label: self.label,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn montage_has_nine_tagged_channels() {
        assert_eq!(ChannelId::ALL.len(), 9);
        assert_eq!(ChannelId::O1.region(), ScalpRegion::Occipital);
        assert_eq!(ChannelId::O2.region(), ScalpRegion::Occipital);
        assert_eq!(ChannelId::Fz.region(), ScalpRegion::Frontal);
        assert_eq!(ChannelId::A2Ref.region(), ScalpRegion::Reference);
        assert_eq!(ChannelId::P7.hemisphere(), Hemisphere::Left);
        assert_eq!(ChannelId::P8.hemisphere(), Hemisphere::Right);
        assert_eq!(ChannelId::Pz.hemisphere(), Hemisphere::Midline);
        for (i, ch) in ChannelId::ALL.iter().enumerate() {
            assert_eq!(ch.index(), i);
        }
    }

    #[test]
    fn class_index_frequency_bijection() {
        let freqs: Vec<u32> = StimulusClass::ALL.iter().map(|c| c.frequency_hz()).collect();
        assert_eq!(freqs, vec![10, 12, 15]);
        for c in StimulusClass::ALL {
            assert_eq!(StimulusClass::from_index(c.index()), Some(c));
            assert_eq!(StimulusClass::from_frequency_hz(c.frequency_hz() as f64), Some(c));
        }
        assert_eq!(StimulusClass::from_index(3), None);
        assert_eq!(StimulusClass::from_frequency_hz(11.0), None);
    }

    #[test]
    fn epoch_rejects_bad_shape_and_non_finite() {
        assert!(EegEpoch::<f32>::new(vec![0.0; 10], None).is_err());
        let mut v = vec![0.0f64; N_CHANNELS * N_SAMPLES];
        v[1600] = f64::NAN;
        let err = EegEpoch::new(v, None).unwrap_err().to_string();
        assert!(err.contains("channel 1"), "{err}");
        let e = EegEpoch::<f32>::zeros(Some(StimulusClass::F12));
        assert_eq!(e.as_slice().len(), 13_500);
        assert_eq!(e.sample_rate_hz(), 500);
    }
}
