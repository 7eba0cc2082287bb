//! Labeled epoch collections and the `SSVEP1` binary file format.
//!
//! Layout (little-endian): magic `SSVEP1`, `u32` n_epochs, `u32` n_channels,
//! `u32` n_samples, `u32` sample_rate_hz, then per epoch a `u8` class index
//! (255 = unlabeled) and `n_channels × n_samples` `f32`, channel-major.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{EegEpoch, SsvepGenParams, StimulusClass, N_CHANNELS, N_CLASSES, N_SAMPLES, SAMPLE_RATE_HZ};
use crate::error::SignalError;
use crate::num::Scalar;

pub const MAGIC: &[u8; 6] = b"SSVEP1";
const HEADER_LEN: usize = 6 + 4 * 4;
const UNLABELED: u8 = 255;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DatasetSource {
    Generated(SsvepGenParams),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub subject_id: String,
    pub source: DatasetSource,
    pub created_unix_s: u64,
}

impl DatasetMetadata {
    pub fn now(subject_id: &str, source: DatasetSource) -> Self {
        let created_unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            subject_id: subject_id.to_string(),
            source,
            created_unix_s,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SsvepDataset<T> {
    pub epochs: Vec<EegEpoch<T>>,
    pub metadata: DatasetMetadata,
}

impl<T: Scalar> SsvepDataset<T> {
    pub fn new(epochs: Vec<EegEpoch<T>>, metadata: DatasetMetadata) -> Self {
        Self { epochs, metadata }
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    /// Epoch count per class index; unlabeled epochs are not counted.
    pub fn class_counts(&self) -> [usize; N_CLASSES] {
        let mut counts = [0; N_CLASSES];
        for label in self.epochs.iter().filter_map(|e| e.label) {
            counts[label.index()] += 1;
        }
        counts
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.epochs.iter().all(|e| e.label.is_some())
    }

    /// Subset by index, preserving order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            epochs: indices.iter().map(|&i| self.epochs[i].clone()).collect(),
            metadata: self.metadata.clone(),
        }
    }

    /// Applies `f` to every epoch.
    pub fn try_map<F>(&self, mut f: F) -> Result<Self, SignalError>
    where
        F: FnMut(&EegEpoch<T>) -> Result<EegEpoch<T>, SignalError>,
    {
        Ok(Self {
            epochs: self.epochs.iter().map(&mut f).collect::<Result<_, _>>()?,
            metadata: self.metadata.clone(),
        })
    }
}

fn encode<T: Scalar>(dataset: &SsvepDataset<T>) -> Vec<u8> {
    let per_epoch = 1 + N_CHANNELS * N_SAMPLES * 4;
    let mut buf = Vec::with_capacity(HEADER_LEN + dataset.len() * per_epoch);
    buf.extend_from_slice(MAGIC);
    for v in [
        dataset.len() as u32,
        N_CHANNELS as u32,
        N_SAMPLES as u32,
        SAMPLE_RATE_HZ,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for epoch in &dataset.epochs {
        buf.push(epoch.label.map_or(UNLABELED, |c| c.index() as u8));
        for v in epoch.as_slice() {
            buf.extend_from_slice(&v.to_f32_lossy().to_le_bytes());
        }
    }
    buf
}

fn decode<T: Scalar>(bytes: &[u8], path: &Path) -> Result<SsvepDataset<T>, SignalError> {
    let truncated = |offset: usize, what: &str| SignalError::Format {
        offset: offset as u64,
        message: format!("truncated payload: expected {what}, file has {} bytes", bytes.len()),
    };
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(SignalError::Format {
            offset: 0,
            message: format!(
                "bad magic {:?}, expected \"SSVEP1\"",
                String::from_utf8_lossy(&bytes[..bytes.len().min(6)])
            ),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(bytes.len(), "22-byte header"));
    }
    let field = |i: usize| {
        let at = 6 + 4 * i;
        (at, u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()))
    };
    let (_, n_epochs) = field(0);
    for (i, expected, name) in [
        (1, N_CHANNELS as u32, "n_channels"),
        (2, N_SAMPLES as u32, "n_samples"),
        (3, SAMPLE_RATE_HZ, "sample_rate_hz"),
    ] {
        let (at, got) = field(i);
        if got != expected {
            return Err(SignalError::Dimension {
                offset: at as u64,
                message: format!("{name} is {got}, this format requires {expected}"),
            });
        }
    }

    let values = N_CHANNELS * N_SAMPLES;
    let mut offset = HEADER_LEN;
    let mut epochs = Vec::with_capacity(n_epochs as usize);
    for k in 0..n_epochs as usize {
        if offset + 1 + values * 4 > bytes.len() {
            return Err(truncated(offset, &format!("epoch {k} of {n_epochs}")));
        }
        let label = match bytes[offset] {
            UNLABELED => None,
            c => Some(StimulusClass::from_index(c as usize).ok_or_else(|| SignalError::Format {
                offset: offset as u64,
                message: format!("class index {c} is not 0, 1, 2 or 255"),
            })?),
        };
        offset += 1;
        let samples: Vec<T> = bytes[offset..offset + values * 4]
            .chunks_exact(4)
            .map(|c| T::of_f32(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        let epoch = EegEpoch::new(samples, label).map_err(|e| SignalError::Format {
            offset: offset as u64,
            message: e.to_string(),
        })?;
        epochs.push(epoch);
        offset += values * 4;
    }
    if offset != bytes.len() {
        return Err(SignalError::Format {
            offset: offset as u64,
            message: format!("{} trailing bytes after last epoch", bytes.len() - offset),
        });
    }
    Ok(SsvepDataset::new(
        epochs,
        DatasetMetadata::now("replay", DatasetSource::File(path.to_path_buf())),
    ))
}

pub fn save_dataset<T: Scalar>(dataset: &SsvepDataset<T>, path: &Path) -> Result<(), SignalError> {
    fs::write(path, encode(dataset)).map_err(|source| SignalError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_dataset<T: Scalar>(path: &Path) -> Result<SsvepDataset<T>, SignalError> {
    let bytes = fs::read(path).map_err(|source| SignalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SsvepDataset<f32> {
        let mut epochs: Vec<EegEpoch<f32>> = StimulusClass::ALL
            .iter()
            .map(|c| {
                let v = (0..N_CHANNELS * N_SAMPLES)
                    .map(|i| (i as f32 * 0.001).sin() + c.index() as f32)
                    .collect();
                EegEpoch::new(v, Some(*c)).unwrap()
            })
            .collect();
        epochs.push(EegEpoch::zeros(None));
        SsvepDataset::new(
            epochs,
            DatasetMetadata::now("t", DatasetSource::File(PathBuf::from("x"))),
        )
    }

    #[test]
    fn encode_decode_round_trip() {
        let d = tiny();
        let back: SsvepDataset<f32> = decode(&encode(&d), Path::new("mem")).unwrap();
        assert_eq!(back.epochs, d.epochs);
        assert_eq!(back.class_counts(), [1, 1, 1]);
        assert!(!back.is_fully_labeled());
    }

    #[test]
    fn bad_magic_is_format_error_at_zero() {
        let mut bytes = encode(&tiny());
        bytes[..6].copy_from_slice(b"XXXXX1");
        match decode::<f32>(&bytes, Path::new("mem")) {
            Err(SignalError::Format { offset: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ten_channels_is_dimension_error() {
        let mut bytes = encode(&tiny());
        bytes[10..14].copy_from_slice(&10u32.to_le_bytes());
        match decode::<f32>(&bytes, Path::new("mem")) {
            Err(SignalError::Dimension { offset: 10, message }) => {
                assert!(message.contains("n_channels"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncation_reports_epoch_offset() {
        let bytes = encode(&tiny());
        let cut = &bytes[..bytes.len() - 100];
        match decode::<f32>(cut, Path::new("mem")) {
            Err(SignalError::Format { offset, message }) => {
                assert_eq!(offset as usize, HEADER_LEN + 3 * (1 + N_CHANNELS * N_SAMPLES * 4));
                assert!(message.contains("truncated"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            decode::<f32>(&bytes[..10], Path::new("mem")),
            Err(SignalError::Format { .. })
        ));
    }

    #[test]
    fn bad_class_byte_rejected() {
        let mut bytes = encode(&tiny());
        bytes[HEADER_LEN] = 7;
        assert!(decode::<f32>(&bytes, Path::new("mem")).is_err());
    }
}
