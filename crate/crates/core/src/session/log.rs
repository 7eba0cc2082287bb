//! Per-trial records and the JSON-lines session log.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, MetricsError};
use crate::metrics::{bits_per_trial, itr_bpm, ConfusionMatrix};
use crate::signal::{StimulusClass, N_CLASSES};
use crate::simworld::{ArrowCommand, PlanStep, RobotPose};

/// What a flickering stimulus stands for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StimulusTarget {
    Object { id: u32, class_name: String },
    Arrow { direction: ArrowCommand },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplayedStimulus {
    pub freq_hz: u32,
    pub target: StimulusTarget,
}

/// One line of `sessionN.log`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: u32,
    /// 1-based within the experiment.
    pub trial: u32,
    /// `"object"` or `"arrow"`.
    pub mode: String,
    pub displayed: Vec<DisplayedStimulus>,
    /// Stimulus the plan calls for; `None` when the plan step is not on offer.
    pub intended_hz: Option<u32>,
    pub fixated_hz: u32,
    pub decoded_hz: u32,
    pub probs: [f32; N_CLASSES],
    pub latency_s: f64,
    /// Flicker duration plus decode latency.
    pub t_seconds: f64,
    /// Command the decode maps to, if any.
    pub command: Option<PlanStep>,
    pub correct: bool,
    pub executed: bool,
    pub pose_after: RobotPose<f64>,
    pub state_after: String,
}

/// Accuracy and information rate recomputed from trial records alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub trials: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub mean_t_seconds: f64,
    #[serde(rename = "B")]
    pub bits: f64,
    pub itr_bpm: f64,
    /// Rows intended, columns decoded.
    pub confusion: [[u64; N_CLASSES]; N_CLASSES],
}

impl SessionSummary {
    pub fn from_log(records: &[TrialRecord]) -> Result<Self, MetricsError> {
        if records.is_empty() {
            return Err(MetricsError::Parameter("log holds no trials".into()));
        }
        let correct = records.iter().filter(|r| r.correct).count();
        let accuracy = correct as f64 / records.len() as f64;
        let mean_t_seconds = records.iter().map(|r| r.t_seconds).sum::<f64>() / records.len() as f64;
        let bits = bits_per_trial(N_CLASSES, accuracy)?;
        let itr = itr_bpm(bits, mean_t_seconds / 60.0)?;
        let mut confusion = ConfusionMatrix::default();
        for r in records {
            let intended = r.intended_hz.and_then(|hz| StimulusClass::from_frequency_hz(hz as f64));
            if let (Some(i), Some(d)) = (intended, StimulusClass::from_frequency_hz(r.decoded_hz as f64)) {
                confusion.record(i, d);
            }
        }
        Ok(Self {
            trials: records.len(),
            correct,
            accuracy,
            mean_t_seconds,
            bits,
            itr_bpm: itr,
            confusion: confusion.counts,
        })
    }
}

pub fn write_log(path: &Path, records: &[TrialRecord]) -> Result<(), Error> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    for r in records {
        serde_json::to_writer(&mut f, r)?;
        f.write_all(b"\n").map_err(io)?;
    }
    Ok(())
}

pub fn read_log(path: &Path) -> Result<Vec<TrialRecord>, Error> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let f = fs::File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(io)?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
